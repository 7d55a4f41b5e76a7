#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/grid_function.hpp"

namespace pshlab {

using PointFn = std::function<double(const std::array<double, 4>&)>;

namespace forms {

inline double abs2_z(const std::array<double, 4>& x) { return x[0] * x[0] + x[1] * x[1]; }
inline double abs2_w(const std::array<double, 4>& x) { return x[2] * x[2] + x[3] * x[3]; }

inline double neg_log_abs_z(const std::array<double, 4>& x) {
    double r2 = abs2_z(x);
    if (r2 <= 0.0) return pos_inf();
    return -0.5 * std::log(r2);
}

inline double poisson_kernel(const std::array<double, 4>& x) {
    double num = 1.0 - abs2_z(x);
    double den = (1.0 - x[0]) * (1.0 - x[0]) + x[1] * x[1];
    if (den <= 0.0) return pos_inf();
    return num / den;
}

}  // namespace forms

// Point evaluator for a registered formula. `dim` is the real dimension of the
// intended domain; parameter validation happens here.
inline PointFn closed_form_evaluator(const std::string& name, int dim,
                                     const std::vector<double>& params) {
    auto need = [&](std::size_t n) {
        if (params.size() != n)
            throw std::invalid_argument(name + ": expected " + std::to_string(n) + " parameter(s)");
    };
    auto alpha_ok = [&](double a) {
        if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument(name + ": alpha must be in (0,1]");
    };
    auto cap_ok = [&](double c) {
        if (!(c > 0.0 && c < kValueCap)) throw std::invalid_argument(name + ": bad cap");
    };

    if (name == "poisson_kernel" || name == "poisson_lift_u") {
        need(0);
        return [](const std::array<double, 4>& x) { return forms::poisson_kernel(x); };
    }
    if (name == "quotient_v") {
        need(0);
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [](const std::array<double, 4>& x) {
            double den = (1.0 - x[0]) * (1.0 - x[0]) + x[1] * x[1];
            if (den <= 0.0) return forms::abs2_w(x) > 0 ? pos_inf() : 0.0;
            return forms::abs2_w(x) / den;
        };
    }
    if (name == "quotient_v_eps") {
        need(1);
        double eps = params[0];
        if (!(eps > 0.0)) throw std::invalid_argument(name + ": eps must be positive");
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [eps](const std::array<double, 4>& x) {
            double den = (1.0 + eps - x[0]) * (1.0 + eps - x[0]) + x[1] * x[1];
            return forms::abs2_w(x) / den;
        };
    }
    if (name == "neg_log_abs_z") {
        need(0);
        return [](const std::array<double, 4>& x) { return forms::neg_log_abs_z(x); };
    }
    if (name == "neg_log_abs_z_capped") {
        need(1);
        cap_ok(params[0]);
        double cap = params[0];
        return [cap](const std::array<double, 4>& x) {
            return std::min(forms::neg_log_abs_z(x), cap);
        };
    }
    if (name == "pow_neg_log_abs_z_capped") {
        need(2);
        alpha_ok(params[0]);
        cap_ok(params[1]);
        double a = params[0], cap = params[1];
        return [a, cap](const std::array<double, 4>& x) {
            return std::pow(std::min(forms::neg_log_abs_z(x), cap), a);
        };
    }
    if (name == "neg_sq_log_abs_z_capped") {
        need(1);
        cap_ok(params[0]);
        double cap = params[0];
        return [cap](const std::array<double, 4>& x) {
            double t = std::min(forms::neg_log_abs_z(x), cap);
            return -t * t;
        };
    }
    if (name == "scaled_log_abs_z") {
        need(1);
        double c = params[0];
        return [c](const std::array<double, 4>& x) { return -c * forms::neg_log_abs_z(x); };
    }
    if (name == "neg_log_abs_zw_capped") {
        need(1);
        cap_ok(params[0]);
        double cap = params[0];
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [cap](const std::array<double, 4>& x) {
            double rz2 = forms::abs2_z(x), rw2 = forms::abs2_w(x);
            if (rz2 <= 0.0 || rw2 <= 0.0) return cap;
            return std::min(-0.5 * std::log(rz2 * rw2), cap);
        };
    }
    if (name == "pow_neg_log_abs_zw_capped") {
        need(2);
        alpha_ok(params[0]);
        cap_ok(params[1]);
        double a = params[0], cap = params[1];
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [a, cap](const std::array<double, 4>& x) {
            double rz2 = forms::abs2_z(x), rw2 = forms::abs2_w(x);
            double t = (rz2 <= 0.0 || rw2 <= 0.0) ? cap : std::min(-0.5 * std::log(rz2 * rw2), cap);
            return std::pow(t, a);
        };
    }
    if (name == "log1p_neg_log_abs_zw_capped") {
        need(1);
        cap_ok(params[0]);
        double cap = params[0];
        return [cap](const std::array<double, 4>& x) {
            double rz2 = forms::abs2_z(x), rw2 = forms::abs2_w(x);
            double t = (rz2 <= 0.0 || rw2 <= 0.0) ? cap : std::min(-0.5 * std::log(rz2 * rw2), cap);
            return std::log1p(t);
        };
    }
    if (name == "ball_envelope_alpha") {
        need(1);
        alpha_ok(params[0]);
        double a = params[0];
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [a](const std::array<double, 4>& x) {
            double s = 1.0 - forms::abs2_w(x);
            if (s <= 0.0) return pos_inf();
            return std::pow(-0.5 * std::log(s), a);
        };
    }
    if (name == "half_log_one_minus_w2") {
        need(0);
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [](const std::array<double, 4>& x) {
            double s = 1.0 - forms::abs2_w(x);
            if (s <= 0.0) return pos_inf();
            return -0.5 * std::log(s);
        };
    }
    if (name == "zw_envelope_alpha") {
        need(1);
        alpha_ok(params[0]);
        double a = params[0];
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [a](const std::array<double, 4>& x) {
            double tz = forms::abs2_z(x), tw = forms::abs2_w(x);
            if (tz >= 0.5) {
                double s = tz - tz * tz;
                if (s <= 0.0) return pos_inf();
                return std::pow(-0.5 * std::log(s), a);
            }
            if (tw >= 0.5) {
                double s = tw - tw * tw;
                if (s <= 0.0) return pos_inf();
                return std::pow(-0.5 * std::log(s), a);
            }
            return std::pow(std::log(2.0), a);
        };
    }
    if (name == "re_z") {
        need(0);
        return [](const std::array<double, 4>& x) { return x[0]; };
    }
    if (name == "re_zw") {
        need(0);
        if (dim != 4) throw std::invalid_argument(name + ": needs two complex variables");
        return [](const std::array<double, 4>& x) { return x[0] * x[2] - x[1] * x[3]; };
    }
    if (name == "norm_sq") {
        need(0);
        return [dim](const std::array<double, 4>& x) {
            double s = forms::abs2_z(x);
            if (dim == 4) s += forms::abs2_w(x);
            return s;
        };
    }
    if (name == "neg_norm_sq") {
        need(0);
        return [dim](const std::array<double, 4>& x) {
            double s = forms::abs2_z(x);
            if (dim == 4) s += forms::abs2_w(x);
            return -s;
        };
    }
    throw std::invalid_argument("unknown closed form: " + name);
}

inline GridFunction eval_closed_form(const std::string& name,
                                     const std::shared_ptr<const GridDomain>& dom,
                                     const std::vector<double>& params = {}) {
    auto fn = closed_form_evaluator(name, dom->dim, params);
    return evaluate(dom, fn);
}

}  // namespace pshlab
