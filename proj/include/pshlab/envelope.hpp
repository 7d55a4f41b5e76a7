#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pshlab/grid_function.hpp"
#include "pshlab/psh_cone.hpp"

namespace pshlab {

struct EnvelopeOptions {
    double tol_fix_scale = 1e-9;     // tol_fix = scale * (1 + sup |obstacle|)
    long iter_max = 0;               // 0 -> 200 * resolution
    const GridFunction* warm_start = nullptr;
    double warm_margin = 0.0;        // added to the warm start; must dominate coarse error
};

struct EnvelopeReport {
    GridFunction result;
    long iterations = 0;
    double final_delta = 0.0;
    std::optional<double> residual;
    bool converged = false;
    double tol_fix = 0.0;
    double maximality_defect = 0.0;  // sup |u - min over circle averages| where the obstacle is slack
};

namespace detail {

// Row bound for the minorant iteration. Masked taps void the row (+inf, no
// constraint); a -inf tap drags the bound to -inf; a +inf tap voids the row.
inline double envelope_row_bound(const std::vector<double>& vals, const GridDomain& dom,
                                 const StencilPattern& pat, std::size_t anchor) {
    double acc = 0.0;
    bool has_neg = false;
    for (std::size_t i = 0; i < pat.flat_offsets.size(); ++i) {
        std::size_t q = anchor + pat.flat_offsets[i];
        if (dom.masked[q]) return pos_inf();
        double v = vals[q];
        if (is_pos_inf(v)) return pos_inf();
        if (is_neg_inf(v)) { has_neg = true; continue; }
        acc += pat.weights[i] * v;
    }
    return has_neg ? neg_inf() : acc;
}

inline double finite_sup_abs(const GridFunction& g) {
    double m = 0.0;
    const auto& dom = *g.domain;
    for (auto p : dom.interior_nodes)
        if (std::isfinite(g.values[p])) m = std::max(m, std::abs(g.values[p]));
    for (auto p : dom.boundary_nodes)
        if (std::isfinite(g.values[p])) m = std::max(m, std::abs(g.values[p]));
    return m;
}

}  // namespace detail

// Largest function below `obstacle` satisfying every circle sub-mean-value
// constraint. Monotone decreasing Jacobi iteration; the fixed point is the
// discrete Perron--Bremermann-type envelope for the compiled stencil cone.
inline EnvelopeReport greatest_minorant(const GridFunction& obstacle, const CompiledStencil& cs,
                                        const EnvelopeOptions& opts = {}) {
    const auto& dom = *obstacle.domain;
    EnvelopeReport rep;
    rep.tol_fix = opts.tol_fix_scale * (1.0 + detail::finite_sup_abs(obstacle));
    long iter_max = opts.iter_max > 0 ? opts.iter_max : 200L * dom.resolution;

    GridFunction u = obstacle;
    // unconstrained (+inf) interior entries start at the saturation cap so
    // that circle averages stay finite and values can flow inward
    for (auto p : dom.interior_nodes)
        if (is_pos_inf(u.values[p])) u.values[p] = kValueCap;
    if (opts.warm_start) {
        for (std::size_t f = 0; f < dom.lattice_size; ++f) {
            if (dom.node_class[f] != NodeClass::Interior || dom.masked[f]) continue;
            double w = opts.warm_start->values[f];
            if (std::isfinite(w)) u.values[f] = std::min(obstacle.values[f], w + opts.warm_margin);
        }
    }
    std::vector<double> next = u.values;

    double delta = pos_inf();
    long it = 0;
    for (; it < iter_max; ++it) {
        delta = 0.0;
        for (auto p : dom.interior_nodes) {
            if (dom.masked[p]) continue;
            double cand = obstacle.values[p];
            for (const auto& pat : cs.patterns) {
                double b = detail::envelope_row_bound(u.values, dom, pat, p);
                if (b < cand) cand = b;
            }
            // forced monotone decrease keeps warm starts on the safe side
            if (cand > u.values[p]) cand = u.values[p];
            next[p] = cand;
            double d = sup_gap(cand, u.values[p]);
            if (d > delta) delta = d;
        }
        u.values.swap(next);
        if (delta <= rep.tol_fix) { ++it; break; }
    }
    rep.iterations = it;
    rep.final_delta = delta;
    rep.converged = delta <= rep.tol_fix;
    rep.result = std::move(u);

    double defect = 0.0;
    for (auto p : dom.interior_nodes) {
        if (dom.masked[p]) continue;
        double v = rep.result.values[p];
        if (!std::isfinite(v)) continue;
        double rows = pos_inf();
        for (const auto& pat : cs.patterns)
            rows = std::min(rows, detail::envelope_row_bound(rep.result.values, dom, pat, p));
        if (std::isfinite(rows) && rows < obstacle.values[p])
            defect = std::max(defect, std::abs(v - rows));
    }
    rep.maximality_defect = defect;
    return rep;
}

// Envelope of boundary data: no interior obstacle at all.
inline EnvelopeReport perron_bremermann(const GridFunction& boundary_data,
                                        const CompiledStencil& cs,
                                        const EnvelopeOptions& opts = {}) {
    const auto& dom = *boundary_data.domain;
    GridFunction obstacle(boundary_data.domain, 0.0);
    for (std::size_t f = 0; f < dom.lattice_size; ++f) {
        switch (dom.node_class[f]) {
            case NodeClass::Boundary: obstacle.values[f] = boundary_data.values[f]; break;
            case NodeClass::Interior: obstacle.values[f] = pos_inf(); break;
            case NodeClass::Excluded: break;
        }
    }
    return greatest_minorant(obstacle, cs, opts);
}

// Least plurisuperharmonic majorant, computed as the mirrored envelope.
inline EnvelopeReport least_psuper_majorant(const GridFunction& f, const CompiledStencil& cs,
                                            const EnvelopeOptions& opts = {}) {
    GridFunction neg = f;
    for (auto& v : neg.values) v = -v;
    EnvelopeReport rep = greatest_minorant(neg, cs, opts);
    for (auto& v : rep.result.values) v = -v;
    return rep;
}

// ---------------------------------------------------------------------------
// Toric (log-coordinate) convex envelope with exact boundary-arc crossings.

struct ToricEnvelopeResult {
    GridFunction result;
    long iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
};

namespace detail {

// Root of e^{2x}+e^{2y} = 1 along the segment p -> p + s*(dx,dy), s in (0,1].
inline std::optional<double> arc_crossing(double x, double y, double dx, double dy) {
    auto F = [&](double s) { return std::exp(2 * (x + s * dx)) + std::exp(2 * (y + s * dy)) - 1.0; };
    if (F(0.0) > 0.0) return std::nullopt;
    if (F(1.0) < 0.0) return std::nullopt;
    double a = 0.0, b = 1.0;
    for (int i = 0; i < 80; ++i) {
        double m = 0.5 * (a + b);
        (F(m) <= 0.0 ? a : b) = m;
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Greatest minorant of the boundary profile that is convex along lattice
// directions and nondecreasing in +x and +y. When `arc_data` is provided,
// constraints crossing the boundary curve use exact crossing values
// (cut-cell secants); otherwise boundary-node values from the profile are
// the only data.
inline ToricEnvelopeResult toric_convex_envelope(
    const GridFunction& boundary_profile,
    const std::function<double(double, double)>& arc_data = nullptr,
    const EnvelopeOptions& opts = {}) {
    const auto& dom = *boundary_profile.domain;
    if (dom.kind != DomainKind::ToricLog2D)
        throw std::invalid_argument("toric_convex_envelope needs a ToricLog2D domain");
    const double h = dom.spacing;
    static const std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};

    struct Term { std::ptrdiff_t off; double w; double cval; bool crossing; };
    struct Row { std::vector<Term> terms; };
    struct NodeRows { std::uint32_t node; std::vector<Row> rows; double obstacle; };

    auto node_status = [&](std::array<int, 4> q) {
        if (!dom.in_lattice(q)) return 0;                     // off lattice (truncation side)
        if (dom.node_class[dom.flat(q)] == NodeClass::Excluded) return 1;  // beyond the arc
        return 2;                                             // usable node
    };

    // Rows anchor at boundary nodes as well: their node-sampled profile values
    // sit up to one cell off the arc, and the crossing constraints are what
    // pull them onto the exact boundary data.
    std::vector<std::uint32_t> anchors(dom.interior_nodes.begin(), dom.interior_nodes.end());
    anchors.insert(anchors.end(), dom.boundary_nodes.begin(), dom.boundary_nodes.end());
    std::vector<NodeRows> all;
    all.reserve(anchors.size());
    for (auto p : anchors) {
        if (dom.masked[p]) continue;
        auto idx = dom.multi(p);
        auto xy = dom.coords(p);
        NodeRows nr;
        nr.node = p;
        nr.obstacle = boundary_profile.values[p];
        // convexity secants
        for (const auto& d : dirs) {
            auto qm = idx, qp = idx;
            qm[0] -= d[0]; qm[1] -= d[1];
            qp[0] += d[0]; qp[1] += d[1];
            int sm = node_status(qm), sp = node_status(qp);
            Row row;
            auto add_side = [&](std::array<int, 4> q, int status, int sgn, double& dist,
                               bool& ok) {
                if (status == 2) {
                    Term t;
                    t.off = static_cast<std::ptrdiff_t>(dom.flat(q)) -
                            static_cast<std::ptrdiff_t>(p);
                    t.crossing = false;
                    t.cval = 0;
                    t.w = 0;  // filled after both arms known
                    row.terms.push_back(t);
                    dist = std::hypot(d[0] * h, d[1] * h);
                    ok = true;
                } else if (status == 1 && arc_data) {
                    auto s = detail::arc_crossing(xy[0], xy[1], sgn * d[0] * h, sgn * d[1] * h);
                    if (!s) { ok = false; return; }
                    double cx = xy[0] + *s * sgn * d[0] * h;
                    double cy = xy[1] + *s * sgn * d[1] * h;
                    Term t;
                    t.off = 0;
                    t.crossing = true;
                    t.cval = arc_data(cx, cy);
                    t.w = 0;
                    row.terms.push_back(t);
                    dist = *s * std::hypot(d[0] * h, d[1] * h);
                    ok = std::isfinite(t.cval);
                } else {
                    ok = false;
                }
            };
            double dm = 0, dp = 0;
            bool okm = false, okp = false;
            add_side(qm, sm, -1, dm, okm);
            if (okm) add_side(qp, sp, +1, dp, okp);
            if (okm && okp && row.terms.size() == 2) {
                row.terms[0].w = dp / (dm + dp);
                row.terms[1].w = dm / (dm + dp);
                nr.rows.push_back(std::move(row));
            }
        }
        // monotone toward the arc
        for (int ax = 0; ax < 2; ++ax) {
            auto q = idx;
            q[ax] += 1;
            int s = node_status(q);
            Row row;
            if (s == 2) {
                Term t;
                t.off = static_cast<std::ptrdiff_t>(dom.flat(q)) - static_cast<std::ptrdiff_t>(p);
                t.crossing = false;
                t.cval = 0;
                t.w = 1.0;
                row.terms.push_back(t);
                nr.rows.push_back(std::move(row));
            } else if (s == 1 && arc_data) {
                double dx = ax == 0 ? h : 0.0, dy = ax == 1 ? h : 0.0;
                auto cr = detail::arc_crossing(xy[0], xy[1], dx, dy);
                if (cr) {
                    Term t;
                    t.off = 0;
                    t.crossing = true;
                    t.cval = arc_data(xy[0] + *cr * dx, xy[1] + *cr * dy);
                    t.w = 1.0;
                    if (std::isfinite(t.cval)) {
                        row.terms.push_back(t);
                        nr.rows.push_back(std::move(row));
                    }
                }
            }
        }
        all.push_back(std::move(nr));
    }

    ToricEnvelopeResult res;
    GridFunction u = boundary_profile;
    for (auto& nr : all) u.values[nr.node] = std::min(nr.obstacle, pos_inf());
    std::vector<double> next = u.values;
    double scale = 1.0 + detail::finite_sup_abs(boundary_profile);
    double tol = opts.tol_fix_scale > 0 ? opts.tol_fix_scale * scale : 1e-12 * scale;
    long iter_max = opts.iter_max > 0 ? opts.iter_max : 400L * dom.resolution;

    long it = 0;
    double delta = pos_inf();
    for (; it < iter_max; ++it) {
        delta = 0.0;
        for (const auto& nr : all) {
            double cand = nr.obstacle;
            for (const auto& row : nr.rows) {
                double acc = 0.0;
                bool voided = false;
                for (const auto& t : row.terms) {
                    double v = t.crossing ? t.cval : u.values[static_cast<std::size_t>(
                                                        static_cast<std::ptrdiff_t>(nr.node) + t.off)];
                    if (!std::isfinite(v)) { voided = true; break; }
                    acc += t.w * v;
                }
                if (!voided && acc < cand) cand = acc;
            }
            if (cand > u.values[nr.node]) cand = u.values[nr.node];
            next[nr.node] = cand;
            double d = sup_gap(cand, u.values[nr.node]);
            if (d > delta) delta = d;
        }
        u.values.swap(next);
        if (delta <= tol) { ++it; break; }
    }
    res.iterations = it;
    res.final_delta = delta;
    res.converged = delta <= tol;
    if (!res.converged) throw std::runtime_error("toric_convex_envelope: no fixed point within budget");
    res.result = std::move(u);
    return res;
}

// ---------------------------------------------------------------------------
// Monge-Ampere mass proxy: cell-volume-weighted positive part of the complex
// Hessian determinant (two variables) or of the Laplacian (one variable).
inline double maximality_residual(const GridFunction& u, const CompiledStencil& cs,
                                  double psh_tol = -1.0) {
    const auto& dom = *u.domain;
    if (psh_tol < 0) psh_tol = default_psh_tolerance(dom);
    auto member = psh_check(u, cs, psh_tol);
    if (!member.is_member)
        throw std::invalid_argument("maximality_residual: input fails the cone membership check");
    const double h = dom.spacing;
    const double h2 = h * h;
    double mass = 0.0;
    auto val = [&](std::size_t p, int d0, int s0, int d1 = -1, int s1 = 0) -> double {
        auto idx = dom.multi(p);
        idx[d0] += s0;
        if (d1 >= 0) idx[d1] += s1;
        return u.values[dom.flat(idx)];
    };
    for (auto p : dom.interior_nodes) {
        if (dom.masked[p]) continue;
        bool ok = std::isfinite(u.values[p]);
        auto idx = dom.multi(p);
        for (int d = 0; d < dom.dim && ok; ++d)
            for (int s = -1; s <= 1 && ok; s += 2) {
                auto q = idx;
                q[d] += s;
                std::size_t fq = dom.flat(q);
                ok = !dom.masked[fq] && std::isfinite(u.values[fq]);
            }
        if (!ok) continue;
        double c = u.values[p];
        if (dom.dim == 2) {
            double lap = (val(p, 0, 1) + val(p, 0, -1) + val(p, 1, 1) + val(p, 1, -1) - 4 * c) / h2;
            mass += std::max(0.0, lap) * h2;
        } else {
            bool okd = true;
            for (int a : {0, 1})
                for (int b : {2, 3})
                    for (int sa : {-1, 1})
                        for (int sb : {-1, 1}) {
                            auto q = idx;
                            q[a] += sa;
                            q[b] += sb;
                            std::size_t fq = dom.flat(q);
                            if (dom.masked[fq] || !std::isfinite(u.values[fq])) okd = false;
                        }
            if (!okd) continue;
            double uzz = 0.25 * (val(p, 0, 1) + val(p, 0, -1) + val(p, 1, 1) + val(p, 1, -1) - 4 * c) / h2;
            double uww = 0.25 * (val(p, 2, 1) + val(p, 2, -1) + val(p, 3, 1) + val(p, 3, -1) - 4 * c) / h2;
            auto mixed = [&](int a, int b) {
                return (val(p, a, 1, b, 1) - val(p, a, 1, b, -1) - val(p, a, -1, b, 1) +
                        val(p, a, -1, b, -1)) /
                       (4 * h2);
            };
            double re = 0.25 * (mixed(0, 2) + mixed(1, 3));
            double im = 0.25 * (mixed(0, 3) - mixed(1, 2));
            double det = uzz * uww - (re * re + im * im);
            mass += std::max(0.0, det) * h2 * h2;
        }
    }
    return mass;
}

// ---------------------------------------------------------------------------
// Radial boundary-limit probe with quadratic Richardson extrapolation.

struct RayLimit {
    std::array<double, 4> ray{0, 0, 0, 0};
    double limit = 0.0;
    bool inf_trend = false;
};

struct BoundaryProbe {
    std::vector<RayLimit> rays;
    bool rays_agree = false;   // finite limits within tol of each other
    double tol = 0.0;
};

inline BoundaryProbe boundary_limit_probe(const GridFunction& u, const std::array<double, 4>& z0,
                                          const std::vector<std::array<double, 4>>& rays,
                                          double tol_bnd = 1e-2, double base_step = -1.0) {
    const auto& dom = *u.domain;
    if (base_step <= 0) base_step = 2.0 * dom.spacing;
    BoundaryProbe probe;
    probe.tol = tol_bnd;
    for (const auto& r : rays) {
        std::array<double, 3> v{};
        bool finite = true;
        for (int k = 0; k < 3; ++k) {
            double t = base_step * (1 << k);
            std::array<double, 4> x{};
            for (int d = 0; d < 4; ++d) x[d] = z0[d] + t * r[d];
            double val = interpolate(u, x);
            if (!std::isfinite(val)) throw std::invalid_argument("probe ray exits the domain");
            v[k] = val;
            if (std::abs(val) > kValueCap / 2) finite = false;
        }
        RayLimit rl;
        rl.ray = r;
        if (!finite || (v[0] > kValueCap / 2 && v[0] > v[1] && v[1] > v[2])) {
            rl.inf_trend = true;
            rl.limit = pos_inf();
        } else {
            double c = ((v[2] - v[1]) / 2.0 - (v[1] - v[0])) / 3.0;
            double b = (v[1] - v[0]) - 3.0 * c;
            rl.limit = v[0] - b - c;
        }
        probe.rays.push_back(rl);
    }
    double lo = pos_inf(), hi = neg_inf();
    bool any = false;
    for (const auto& rl : probe.rays)
        if (!rl.inf_trend) {
            lo = std::min(lo, rl.limit);
            hi = std::max(hi, rl.limit);
            any = true;
        }
    probe.rays_agree = !any || (hi - lo) <= tol_bnd;
    return probe;
}

// ---------------------------------------------------------------------------
// Bounded-data envelopes from below and the direct envelope from above.

struct SandwichResult {
    GridFunction lower;
    GridFunction upper;
    std::vector<EnvelopeReport> cutoff_reports;
    EnvelopeReport upper_report;
};

inline SandwichResult sandwich_envelopes(const GridFunction& boundary_data,
                                         const std::vector<double>& cutoffs,
                                         const CompiledStencil& cs,
                                         const EnvelopeOptions& opts = {}) {
    const auto& dom = *boundary_data.domain;
    if (cutoffs.empty()) throw std::invalid_argument("sandwich_envelopes: empty cutoff list");
    for (std::size_t i = 0; i + 1 < cutoffs.size(); ++i)
        if (!(cutoffs[i] < cutoffs[i + 1]))
            throw std::invalid_argument("sandwich_envelopes: cutoffs must increase");
    if (!(cutoffs.back() < kValueCap))
        throw std::invalid_argument("sandwich_envelopes: cutoffs must stay below the cap");

    SandwichResult out;
    GridFunction prev;
    EnvelopeOptions run = opts;
    for (std::size_t k = 0; k < cutoffs.size(); ++k) {
        GridFunction data = boundary_data;
        for (auto f : dom.boundary_nodes) data.values[f] = std::min(data.values[f], cutoffs[k]);
        EnvelopeReport rep = perron_bremermann(data, cs, run);
        if (k > 0) {
            double drop = 0.0;
            for (auto p : dom.interior_nodes) {
                if (dom.masked[p]) continue;
                double a = prev.values[p], b = rep.result.values[p];
                if (std::isfinite(a) && std::isfinite(b)) drop = std::max(drop, a - b);
            }
            if (drop > 1e-6 * (1.0 + std::abs(cutoffs.back())))
                throw std::runtime_error("sandwich_envelopes: cutoff sequence not monotone");
        }
        prev = rep.result;
        out.cutoff_reports.push_back(std::move(rep));
    }
    out.lower = regularize(prev, RegularizeMode::USC);
    out.upper_report = perron_bremermann(boundary_data, cs, opts);
    out.upper = out.upper_report.result;
    return out;
}

}  // namespace pshlab
