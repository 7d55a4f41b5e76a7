#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "pshlab/envelope.hpp"
#include "pshlab/grid_function.hpp"

namespace pshlab {

enum class SVerdict { Tame, Singular, Mixed, Inconclusive };

inline const char* to_string(SVerdict v) {
    switch (v) {
        case SVerdict::Tame: return "Tame";
        case SVerdict::Singular: return "Singular";
        case SVerdict::Mixed: return "Mixed";
        case SVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct SOperatorOptions {
    EnvelopeOptions env;
    double eps_tame_scale = 1e-3;  // eps_tame = scale * (1 + sup_test f)
    double tol_mono_scale = 1e-7;
    int test_dilate = 2;
    bool check_membership = true;
};

struct SReport {
    std::vector<double> lambdas;
    std::vector<GridFunction> s_lambda_values;
    GridFunction s_limit;
    double tail_estimate = 0.0;      // sup over the test region of the last rung
    double richardson_tail = 0.0;    // extrapolated tail from the last three rungs
    double singular_gap = 0.0;       // sup over the test region of |S_last - f|
    double eps_tame = 0.0;
    double sup_f_test = 0.0;
    bool monotone_ok = true;
    SVerdict verdict = SVerdict::Inconclusive;
    std::vector<std::uint32_t> test_region;
};

inline GridFunction plus_part(const GridFunction& f, double lambda) {
    GridFunction g = f;
    for (auto& v : g.values) {
        if (is_pos_inf(v)) continue;  // stays +inf
        v = std::max(v - lambda, 0.0);
    }
    return g;
}

// Operational stand-in for membership in M: the least majorant of the
// capped function must settle below the saturation midpoint.
inline bool check_m_membership(const GridFunction& f, const CompiledStencil& cs,
                               const EnvelopeOptions& opts = {}) {
    GridFunction capped = f;
    for (auto& v : capped.values) v = std::min(v, kValueCap / 2.0);
    EnvelopeReport rep = least_psuper_majorant(capped, cs, opts);
    if (!rep.converged) return false;
    const auto& dom = *f.domain;
    for (auto p : dom.interior_nodes) {
        if (dom.masked[p]) continue;
        if (!(rep.result.values[p] < kValueCap / 2.0 + 1.0)) return false;
    }
    return true;
}

inline GridFunction reduced(const GridFunction& f, double lambda, const CompiledStencil& cs,
                            const SOperatorOptions& opts = {}) {
    if (lambda < 0) throw std::invalid_argument("reduced: lambda must be nonnegative");
    if (opts.check_membership && !check_m_membership(f, cs, opts.env))
        throw std::runtime_error("reduced: majorant iteration diverges (no superharmonic cap)");
    EnvelopeReport rep = least_psuper_majorant(plus_part(f, lambda), cs, opts.env);
    if (!rep.converged)
        throw std::runtime_error("reduced: majorant iteration did not converge");
    return rep.result;
}

inline GridFunction s_lambda(const GridFunction& f, double lambda, const CompiledStencil& cs,
                             const SOperatorOptions& opts = {}) {
    return regularize(reduced(f, lambda, cs, opts), RegularizeMode::LSC);
}

inline SReport s_operator(const GridFunction& f, const std::vector<double>& lambdas,
                          const CompiledStencil& cs, const SOperatorOptions& opts = {}) {
    if (lambdas.size() < 3) throw std::invalid_argument("s_operator: need at least 3 rungs");
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
        if (!(lambdas[i] < lambdas[i + 1]))
            throw std::invalid_argument("s_operator: ladder must increase");
    if (!(lambdas.back() <= kValueCap / 4.0))
        throw std::invalid_argument("s_operator: ladder exceeds the saturation budget");

    SReport rep;
    rep.lambdas = lambdas;
    const auto& dom = *f.domain;
    rep.test_region = dom.test_region(opts.test_dilate);

    SOperatorOptions per_rung = opts;
    per_rung.check_membership = false;
    if (opts.check_membership && !check_m_membership(f, cs, opts.env))
        throw std::runtime_error("s_operator: input has no superharmonic cap");

    for (double lam : lambdas)
        rep.s_lambda_values.push_back(s_lambda(f, lam, cs, per_rung));

    double sup_f = 0.0, sup_f_global = 0.0;
    for (auto p : rep.test_region) {
        double v = f.values[p];
        if (std::isfinite(v)) sup_f = std::max(sup_f, v);
    }
    for (auto p : dom.interior_nodes) {
        double v = f.values[p];
        if (std::isfinite(v)) sup_f_global = std::max(sup_f_global, v);
    }
    rep.sup_f_test = sup_f;
    rep.eps_tame = opts.eps_tame_scale * (1.0 + sup_f);
    double tol_mono = opts.tol_mono_scale * (1.0 + sup_f);

    for (std::size_t i = 0; i + 1 < rep.s_lambda_values.size(); ++i) {
        for (auto p : rep.test_region) {
            double a = rep.s_lambda_values[i].values[p];
            double b = rep.s_lambda_values[i + 1].values[p];
            if (std::isfinite(a) && std::isfinite(b) && b > a + tol_mono) {
                rep.monotone_ok = false;
                break;
            }
        }
        if (!rep.monotone_ok) break;
    }

    GridFunction inf_over(f.domain, 0.0);
    for (std::size_t p = 0; p < dom.lattice_size; ++p) {
        if (dom.node_class[p] == NodeClass::Excluded) continue;
        double m = pos_inf();
        for (const auto& s : rep.s_lambda_values) m = std::min(m, s.values[p]);
        inf_over.values[p] = m;
    }
    rep.s_limit = regularize(inf_over, RegularizeMode::LSC);

    auto sup_test = [&](const GridFunction& g) {
        double m = 0.0;
        for (auto p : rep.test_region)
            if (std::isfinite(g.values[p])) m = std::max(m, g.values[p]);
            else return pos_inf();
        return m;
    };
    std::size_t n = rep.s_lambda_values.size();
    rep.tail_estimate = sup_test(rep.s_lambda_values[n - 1]);
    double t1 = sup_test(rep.s_lambda_values[n - 3]);
    double t2 = sup_test(rep.s_lambda_values[n - 2]);
    double t3 = rep.tail_estimate;
    double den = t2 - t1;
    if (std::isfinite(t1) && std::isfinite(t3) && std::abs(den) > 1e-300) {
        double r = (t3 - t2) / den;
        rep.richardson_tail = std::abs(r) < 1.0 ? std::max(0.0, t3 + (t3 - t2) * r / (1.0 - r)) : t3;
    } else {
        rep.richardson_tail = t3;
    }

    // compare against the lower-regularized representative of f: S_lambda is
    // built from the same regularization, so this measures the operator, not
    // the regularization bias at steep nodes
    GridFunction f_lsc = regularize(f, RegularizeMode::LSC);
    double gap = 0.0;
    for (auto p : rep.test_region) {
        double s = rep.s_lambda_values[n - 1].values[p], v = f_lsc.values[p];
        if (std::isfinite(s) && std::isfinite(v)) gap = std::max(gap, std::abs(s - v));
        else if (s != v) gap = pos_inf();
    }
    rep.singular_gap = gap;

    if (!rep.monotone_ok) rep.verdict = SVerdict::Inconclusive;
    else if (rep.tail_estimate <= rep.eps_tame) rep.verdict = SVerdict::Tame;
    else if (gap <= rep.eps_tame * (1.0 + sup_f_global)) rep.verdict = SVerdict::Singular;
    else rep.verdict = SVerdict::Mixed;
    return rep;
}

struct AbsorbResult {
    GridFunction lhs;  // s_limit of f + q
    GridFunction rhs;  // s_limit of f
    double sup_gap = 0.0;
};

inline AbsorbResult tame_absorb_check(const GridFunction& f, const GridFunction& q,
                                      const CompiledStencil& cs,
                                      const std::vector<double>& lambdas,
                                      const SOperatorOptions& opts = {}) {
    SReport q_rep = s_operator(q, lambdas, cs, opts);
    if (q_rep.verdict != SVerdict::Tame)
        throw std::invalid_argument("tame_absorb_check: q is not tame on this ladder");
    GridFunction fq = f;
    for (std::size_t i = 0; i < fq.values.size(); ++i)
        fq.values[i] = saturate(fq.values[i] + q.values[i]);
    SReport lhs = s_operator(fq, lambdas, cs, opts);
    SReport rhs = s_operator(f, lambdas, cs, opts);
    AbsorbResult out;
    out.lhs = lhs.s_limit;
    out.rhs = rhs.s_limit;
    for (auto p : rhs.test_region)
        out.sup_gap = std::max(out.sup_gap, sup_gap(out.lhs.values[p], out.rhs.values[p]));
    return out;
}

// ---------------------------------------------------------------------------
// Piecewise-linear convex gauges phi(t) = sum_k (t - n_k)^+.

struct Gauge {
    std::vector<double> breakpoints;
    double operator()(double t) const {
        double s = 0.0;
        for (double nk : breakpoints) s += std::max(t - nk, 0.0);
        return s;
    }
    double slope_after(std::size_t m) const { return static_cast<double>(m); }
};

inline Gauge gauge_from_sequence(const std::vector<double>& n_k) {
    if (n_k.empty()) throw std::invalid_argument("gauge: empty breakpoint list");
    for (std::size_t i = 0; i < n_k.size(); ++i) {
        if (!(n_k[i] > 0)) throw std::invalid_argument("gauge: breakpoints must be positive");
        if (i > 0 && !(n_k[i] > n_k[i - 1]))
            throw std::invalid_argument("gauge: breakpoints must strictly increase");
    }
    return Gauge{n_k};
}

struct GaugeTamenessResult {
    bool majorant_found = false;
    GridFunction witness;         // the least majorant when found
    bool crosscheck_ok = true;    // when found, u^+ classified Tame
    SVerdict uplus_verdict = SVerdict::Inconclusive;
};

// Superlinear-gauge test: psi o u admits a plurisuperharmonic majorant iff the
// iteration settles below the saturation midpoint on the test region.
inline GaugeTamenessResult gauge_tameness_test(const GridFunction& u,
                                               const std::function<double(double)>& psi,
                                               const CompiledStencil& cs,
                                               const std::vector<double>& lambdas,
                                               const SOperatorOptions& opts = {}) {
    GridFunction comp = u;
    for (auto& v : comp.values) v = is_pos_inf(v) ? pos_inf() : saturate(psi(v));
    EnvelopeReport rep = least_psuper_majorant(comp, cs, opts.env);
    GaugeTamenessResult out;
    out.witness = rep.result;
    const auto& dom = *u.domain;
    bool found = rep.converged;
    if (found) {
        for (auto p : dom.test_region(opts.test_dilate))
            if (!(rep.result.values[p] < kValueCap / 2.0)) { found = false; break; }
    }
    out.majorant_found = found;
    if (found) {
        GridFunction uplus = u;
        for (auto& v : uplus.values)
            if (!is_pos_inf(v)) v = std::max(v, 0.0);
        SReport s = s_operator(uplus, lambdas, cs, opts);
        out.uplus_verdict = s.verdict;
        out.crosscheck_ok = s.verdict == SVerdict::Tame;
    }
    return out;
}

}  // namespace pshlab
