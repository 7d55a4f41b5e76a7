#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace pshlab {

// Saturated extended reals. Finite values live in [-kValueCap, kValueCap];
// anything beyond saturates to +/-infinity, which acts as the spike token
// for unbounded data (absorbing under sums and averages, dominated by min).
inline constexpr double kValueCap = 1.0e6;

inline constexpr double pos_inf() { return std::numeric_limits<double>::infinity(); }
inline constexpr double neg_inf() { return -std::numeric_limits<double>::infinity(); }

inline bool is_pos_inf(double x) { return x == pos_inf(); }
inline bool is_neg_inf(double x) { return x == neg_inf(); }
inline bool is_finite_value(double x) { return std::isfinite(x); }

// Clamp a computed value into the saturated range.
inline double saturate(double x) {
    if (std::isnan(x)) return pos_inf();
    if (x > kValueCap) return pos_inf();
    if (x < -kValueCap) return neg_inf();
    return x;
}

// Difference that treats equal infinities as zero gap (used for sup-norm
// deltas between iterates, where inf - inf would otherwise poison the max).
inline double sup_gap(double a, double b) {
    if (a == b) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b)) return pos_inf();
    return std::abs(a - b);
}

}  // namespace pshlab
