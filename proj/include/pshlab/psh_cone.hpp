#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pshlab/closed_forms.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/grid_function.hpp"

namespace pshlab {

// Finite family of discrete complex-direction circles. Sub-mean-value along
// every member circle is the membership test for the discrete cone.
//
// Directions are Gaussian-integer pairs so every circle sample lands exactly
// on a lattice node: the 8 points per (direction, radius) split into two
// exact 4-point rings (zeta in {±r, ±ir} and zeta in r{±1±i}). Interpolated
// off-lattice samples are not used; their O(h^2) bias against saddle-shaped
// data makes the envelope iteration inconsistent.
struct StencilFamily {
    int complex_dim = 1;
    // integer complex directions (Re a1, Im a1, Re a2, Im a2)
    std::vector<std::array<int, 4>> directions;
    int circle_points = 8;          // 4 + 4 per radius, two exact rings
    std::vector<int> radius_steps;  // multiples of the grid spacing
};

inline StencilFamily make_stencil(const GridDomain& dom) {
    StencilFamily st;
    st.circle_points = 8;
    st.radius_steps.clear();
    for (int r = 1; r <= dom.stencil_reach; ++r) st.radius_steps.push_back(r);
    if (dom.dim == 2) {
        st.complex_dim = 1;
        st.directions = {{1, 0, 0, 0}};
    } else {
        st.complex_dim = 2;
        st.directions = {{1, 0, 0, 0}, {0, 0, 1, 0},          // axes
                         {1, 0, 1, 0},  {1, 0, -1, 0},        // (1, ±1)
                         {1, 0, 0, 1},  {1, 0, 0, -1},        // (1, ±i)
                         {1, 0, 1, 1},  {1, 0, 1, -1},        // (1, 1±i)
                         {1, 0, -1, 1}, {1, 0, -1, -1}};      // (1, -1±i)
    }
    return st;
}

// One ring constraint: equal-weight lattice taps relative to the anchor.
// The row reads  value <= sum w_i f_i,  w_i = 1/4.
struct StencilPattern {
    std::vector<std::ptrdiff_t> flat_offsets;
    std::vector<std::array<int, 4>> cell_offsets;
    std::vector<double> weights;
    int direction = 0;
    int radius_step = 1;
};

struct CompiledStencil {
    std::vector<StencilPattern> patterns;
    int reach = 0;
    int circle_points = 8;
};

inline CompiledStencil compile_stencil(const StencilFamily& st, const GridDomain& dom) {
    if ((st.complex_dim == 1) != (dom.dim == 2))
        throw std::invalid_argument("stencil dimension does not match domain");
    CompiledStencil cs;
    cs.circle_points = st.circle_points;
    // zeta values of the two rings, as Gaussian integers scaled by r
    static const std::array<std::array<int, 2>, 4> ringA{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    static const std::array<std::array<int, 2>, 4> ringB{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
    for (std::size_t di = 0; di < st.directions.size(); ++di) {
        const auto& a = st.directions[di];
        for (int r : st.radius_steps) {
            for (const auto* ring : {&ringA, &ringB}) {
                StencilPattern pat;
                pat.direction = static_cast<int>(di);
                pat.radius_step = r;
                int reach = 0;
                for (const auto& z : *ring) {
                    int zr = r * z[0], zi = r * z[1];
                    std::array<int, 4> off{zr * a[0] - zi * a[1], zr * a[1] + zi * a[0],
                                           zr * a[2] - zi * a[3], zr * a[3] + zi * a[2]};
                    std::ptrdiff_t fo = 0;
                    for (int d = 0; d < dom.dim; ++d) {
                        fo += off[d] * dom.stride[d];
                        reach = std::max(reach, std::abs(off[d]));
                    }
                    pat.cell_offsets.push_back(off);
                    pat.flat_offsets.push_back(fo);
                    pat.weights.push_back(0.25);
                }
                if (reach > dom.stencil_reach) continue;  // ring exceeds the interior margin
                cs.reach = std::max(cs.reach, reach);
                cs.patterns.push_back(std::move(pat));
            }
        }
    }
    if (cs.patterns.empty())
        throw std::runtime_error("stencil leaves the classified interior margin");
    return cs;
}

struct ConeMembershipReport {
    bool is_member = false;
    double worst_violation = 0.0;
    std::optional<std::uint32_t> violating_node;
    std::optional<int> violating_direction;
    double tolerance = 0.0;
};

// Circle averages of smooth cone members carry O(h^2) discretization error;
// the strictly concave witness -|z|^2 violates by 4h^2 and must be rejected.
inline double default_psh_tolerance(const GridDomain& dom) {
    return 2.0 * dom.spacing * dom.spacing;
}

// Circle average at an anchor; +inf when a tap is non-finite or masked
// (such rows impose no constraint).
inline double pattern_average(const GridFunction& f, const GridDomain& dom,
                              const StencilPattern& pat, std::size_t anchor) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pat.flat_offsets.size(); ++i) {
        std::size_t q = anchor + pat.flat_offsets[i];
        if (dom.masked[q]) return pos_inf();
        double v = f.values[q];
        if (!std::isfinite(v)) return pos_inf();
        acc += pat.weights[i] * v;
    }
    return acc;
}

// Membership sweep with rows anchored on an explicit node set; the default
// check anchors on every interior unmasked node.
inline ConeMembershipReport psh_check_on(const GridFunction& f, const CompiledStencil& cs,
                                         const std::vector<std::uint32_t>& anchors, double tol) {
    const auto& dom = *f.domain;
    ConeMembershipReport rep;
    rep.tolerance = tol;
    rep.worst_violation = 0.0;
    for (auto p : anchors) {
        if (dom.masked[p] || dom.node_class[p] != NodeClass::Interior) continue;
        double fp = f.values[p];
        if (is_pos_inf(fp))
            throw std::invalid_argument("psh_check: +inf at an unmasked interior node");
        if (is_neg_inf(fp)) continue;
        for (std::size_t k = 0; k < cs.patterns.size(); ++k) {
            double avg = pattern_average(f, dom, cs.patterns[k], p);
            if (!std::isfinite(avg)) continue;
            double viol = fp - avg;
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.violating_node = p;
                rep.violating_direction = cs.patterns[k].direction;
            }
        }
    }
    rep.is_member = rep.worst_violation <= tol;
    return rep;
}

inline ConeMembershipReport psh_check(const GridFunction& f, const CompiledStencil& cs,
                                      double tol) {
    return psh_check_on(f, cs, f.domain->interior_nodes, tol);
}

inline ConeMembershipReport psh_check(const GridFunction& f, const StencilFamily& st,
                                      double tol = -1.0) {
    auto cs = compile_stencil(st, *f.domain);
    return psh_check(f, cs, tol < 0 ? default_psh_tolerance(*f.domain) : tol);
}

// ---------------------------------------------------------------------------
// Log-coordinate (toric) reduction for rotation-invariant data on the ball.

inline double rotation_invariance_defect(const GridFunction& f) {
    const auto& dom = *f.domain;
    if (dom.dim != 4) throw std::invalid_argument("toric reduction needs Ball2C data");
    std::map<std::pair<long, long>, std::pair<double, double>> classes;  // (min,max) per radii pair
    int mid = (dom.resolution - 1) / 2;
    for (auto p : dom.interior_nodes) {
        if (dom.masked[p]) continue;
        auto idx = dom.multi(p);
        long rz = static_cast<long>(idx[0] - mid) * (idx[0] - mid) +
                  static_cast<long>(idx[1] - mid) * (idx[1] - mid);
        long rw = static_cast<long>(idx[2] - mid) * (idx[2] - mid) +
                  static_cast<long>(idx[3] - mid) * (idx[3] - mid);
        double v = f.values[p];
        if (!std::isfinite(v)) continue;
        auto [it, fresh] = classes.try_emplace({rz, rw}, std::pair<double, double>{v, v});
        if (!fresh) {
            it->second.first = std::min(it->second.first, v);
            it->second.second = std::max(it->second.second, v);
        }
    }
    double defect = 0.0;
    for (const auto& [key, mm] : classes) defect = std::max(defect, mm.second - mm.first);
    return defect;
}

inline GridFunction toric_reduce(const GridFunction& f,
                                 const std::shared_ptr<const GridDomain>& toric,
                                 double tol = 1e-9) {
    const auto& dom = *f.domain;
    if (toric->kind != DomainKind::ToricLog2D)
        throw std::invalid_argument("target domain must be ToricLog2D");
    double defect = rotation_invariance_defect(f);
    if (defect > tol)
        throw std::invalid_argument("data is not rotation invariant: defect " +
                                    std::to_string(defect));
    // sample radii clamped one cell inside the ball so interpolation cells stay valid
    double rmax = 1.0 - 2.0 * dom.spacing;
    GridFunction g(toric);
    for (std::size_t t = 0; t < toric->lattice_size; ++t) {
        if (toric->node_class[t] == NodeClass::Excluded) continue;
        auto xy = toric->coords(t);
        double rz = std::min(std::exp(xy[0]), rmax);
        double rw = std::min(std::exp(xy[1]), rmax);
        g.values[t] = saturate(interpolate(f, {rz, 0.0, rw, 0.0}));
    }
    return g;
}

// Rotation-invariant membership: the log-coordinate profile must be convex
// along lattice directions (axes and diagonals) and nondecreasing toward the
// boundary arc (increasing x and y).
inline ConeMembershipReport toric_psh_check(const GridFunction& g, double tol = -1.0) {
    const auto& dom = *g.domain;
    if (dom.kind != DomainKind::ToricLog2D)
        throw std::invalid_argument("toric_psh_check needs ToricLog2D data");
    if (tol < 0) tol = default_psh_tolerance(dom);
    ConeMembershipReport rep;
    rep.tolerance = tol;
    static const std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};
    auto value_at = [&](std::array<int, 4> q) -> double {
        if (!dom.in_lattice(q)) return pos_inf();
        std::size_t f = dom.flat(q);
        if (dom.node_class[f] == NodeClass::Excluded || dom.masked[f]) return pos_inf();
        return g.values[f];
    };
    for (auto p : dom.interior_nodes) {
        if (dom.masked[p]) continue;
        double gp = g.values[p];
        if (!std::isfinite(gp)) continue;
        auto idx = dom.multi(p);
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            auto qm = idx, qp = idx;
            qm[0] -= dirs[d][0]; qm[1] -= dirs[d][1];
            qp[0] += dirs[d][0]; qp[1] += dirs[d][1];
            double vm = value_at(qm), vp = value_at(qp);
            if (!std::isfinite(vm) || !std::isfinite(vp)) continue;
            double viol = gp - 0.5 * (vm + vp);
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.violating_node = p;
                rep.violating_direction = static_cast<int>(d);
            }
        }
        for (int ax = 0; ax < 2; ++ax) {
            auto qp = idx;
            qp[ax] += 1;
            double vp = value_at(qp);
            if (!std::isfinite(vp)) continue;
            double viol = gp - vp;  // must be nondecreasing toward the arc
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.violating_node = p;
                rep.violating_direction = 4 + ax;
            }
        }
    }
    rep.is_member = rep.worst_violation <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Closed-form complex Hessian identities, checked against centered differences.

enum class HessianCase { FirstExampleU, SecondExamplePphi };

struct HessianRow {
    double radius = 0.0;        // |w| (first case) or |z| (second case)
    double analytic = 0.0;
    double finite_difference = 0.0;
    double rel_error = 0.0;
    double positivity_factor = 0.0;  // the bracket whose sign certifies membership
};

namespace detail {

inline double first_example_value(double t, double alpha) {  // t = |w|^2
    return std::pow(-0.5 * std::log(1.0 - t), alpha);
}
inline double second_example_value(double t, double alpha) {  // t = |z|^2
    return std::pow(-0.5 * std::log(t - t * t), alpha);
}

}  // namespace detail

inline std::vector<HessianRow> hessian_formula_check(HessianCase which,
                                                     const std::vector<double>& radii,
                                                     double alpha, double fd_spacing = 1e-3) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    std::vector<HessianRow> rows;
    for (double r : radii) {
        HessianRow row;
        row.radius = r;
        double h = fd_spacing;
        if (which == HessianCase::FirstExampleU) {
            if (!(r > 4 * h && r < 1.0 - 4 * h))
                throw std::invalid_argument("sample too close to a singular locus");
            double t = r * r;
            double L = -std::log(1.0 - t);
            row.positivity_factor = (alpha - 1.0) * t + L;
            row.analytic = alpha * std::pow(0.5 * L, alpha - 2.0) * row.positivity_factor /
                           (4.0 * (1.0 - t) * (1.0 - t));
            auto U = [&](double x, double y) {
                return detail::first_example_value(x * x + y * y, alpha);
            };
            double lap = (U(r + h, 0) + U(r - h, 0) + U(r, h) + U(r, -h) - 4.0 * U(r, 0)) / (h * h);
            row.finite_difference = 0.25 * lap;
        } else {
            const double glue = std::numbers::sqrt2 / 2.0;
            if (!(r > glue + 4 * h && r < 1.0 - 4 * h))
                throw std::invalid_argument("sample too close to the gluing locus");
            double t = r * r;
            double D = t - t * t, B = 1.0 - 2.0 * t;
            double M = -std::log(D);
            row.positivity_factor = (alpha - 1.0) * B * B + M * t;
            row.analytic = 0.25 * alpha * std::pow(0.5 * M, alpha - 2.0) * (t / (D * D)) *
                           row.positivity_factor;
            auto V = [&](double x, double y) {
                return detail::second_example_value(x * x + y * y, alpha);
            };
            double lap = (V(r + h, 0) + V(r - h, 0) + V(r, h) + V(r, -h) - 4.0 * V(r, 0)) / (h * h);
            row.finite_difference = 0.25 * lap;
        }
        row.rel_error = std::abs(row.analytic - row.finite_difference) /
                        std::max(std::abs(row.analytic), 1e-12);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace pshlab
