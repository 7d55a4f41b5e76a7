#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pshlab/grid_function.hpp"
#include "pshlab/psh_cone.hpp"
#include "pshlab/simplex.hpp"

namespace pshlab {

inline constexpr std::size_t kLpNodeCap = 600;

// Polyhedral encoding of the discrete cone on a small grid. Each row reads
//   u(anchor) <= sum_i w_i u(tap_i),   w_i >= 0,  sum w_i = 1,
// one row per (interior unmasked node, direction, radius).
struct ConeLP {
    std::shared_ptr<const GridDomain> domain;
    std::size_t node_count = 0;                 // dense in-domain nodes
    std::vector<std::uint32_t> dense_to_flat;
    std::vector<int> flat_to_dense;             // -1 when excluded
    struct Row {
        int anchor = 0;
        std::vector<std::pair<int, double>> taps;  // dense index, weight (sum 1)
    };
    std::vector<Row> rows;
    bool includes_constants = true;
};

inline ConeLP build_cone(const std::shared_ptr<const GridDomain>& dom,
                         const StencilFamily& st) {
    if (dom->in_domain_count() > kLpNodeCap)
        throw std::invalid_argument("build_cone: node count exceeds the LP cap");
    ConeLP cone;
    cone.domain = dom;
    cone.flat_to_dense.assign(dom->lattice_size, -1);
    for (std::size_t f = 0; f < dom->lattice_size; ++f) {
        if (dom->node_class[f] == NodeClass::Excluded) continue;
        cone.flat_to_dense[f] = static_cast<int>(cone.dense_to_flat.size());
        cone.dense_to_flat.push_back(static_cast<std::uint32_t>(f));
    }
    cone.node_count = cone.dense_to_flat.size();
    if (dom->kind == DomainKind::ToricLog2D) {
        // convexity secants plus monotonicity toward the arc
        static const std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};
        for (auto p : dom->interior_nodes) {
            if (dom->masked[p]) continue;
            auto idx = dom->multi(p);
            auto usable = [&](std::array<int, 4> q) -> int {
                if (!dom->in_lattice(q)) return -1;
                std::size_t f = dom->flat(q);
                if (dom->node_class[f] == NodeClass::Excluded || dom->masked[f]) return -1;
                return cone.flat_to_dense[f];
            };
            for (const auto& d : dirs) {
                auto qm = idx, qp = idx;
                qm[0] -= d[0]; qm[1] -= d[1];
                qp[0] += d[0]; qp[1] += d[1];
                int a = usable(qm), b = usable(qp);
                if (a < 0 || b < 0) continue;
                ConeLP::Row row;
                row.anchor = cone.flat_to_dense[p];
                row.taps = {{a, 0.5}, {b, 0.5}};
                cone.rows.push_back(std::move(row));
            }
            for (int ax = 0; ax < 2; ++ax) {
                auto q = idx;
                q[ax] += 1;
                int b = usable(q);
                if (b < 0) continue;
                ConeLP::Row row;
                row.anchor = cone.flat_to_dense[p];
                row.taps = {{b, 1.0}};
                cone.rows.push_back(std::move(row));
            }
        }
        return cone;
    }
    auto cs = compile_stencil(st, *dom);
    for (auto p : dom->interior_nodes) {
        if (dom->masked[p]) continue;
        for (const auto& pat : cs.patterns) {
            ConeLP::Row row;
            row.anchor = cone.flat_to_dense[p];
            bool ok = true;
            for (std::size_t i = 0; i < pat.flat_offsets.size(); ++i) {
                std::size_t q = p + pat.flat_offsets[i];
                if (dom->masked[q]) { ok = false; break; }
                row.taps.emplace_back(cone.flat_to_dense[q], pat.weights[i]);
            }
            if (ok) cone.rows.push_back(std::move(row));
        }
    }
    return cone;
}

// Largest slack of `value - average` over all rows; negative means every
// sub-mean-value inequality holds.
inline double cone_worst_violation(const ConeLP& cone, const std::vector<double>& u) {
    double worst = -pos_inf();
    for (const auto& row : cone.rows) {
        double avg = 0.0;
        for (auto [j, w] : row.taps) avg += w * u[j];
        worst = std::max(worst, u[row.anchor] - avg);
    }
    return worst;
}

inline std::vector<double> dense_values(const ConeLP& cone, const GridFunction& g) {
    std::vector<double> v(cone.node_count);
    for (std::size_t j = 0; j < cone.node_count; ++j) {
        double x = g.values[cone.dense_to_flat[j]];
        if (!std::isfinite(x))
            throw std::invalid_argument("LP data must be finite; cap it first");
        v[j] = x;
    }
    return v;
}

// sup { u(z) : u in the cone, u <= g nodewise }  via the primal LP.
inline double envelope_lp(const GridFunction& g, const ConeLP& cone, std::uint32_t z_flat) {
    auto gv = dense_values(cone, g);
    int z = cone.flat_to_dense[z_flat];
    if (z < 0) throw std::invalid_argument("envelope_lp: node outside the domain");
    // substitute u = g - s, s >= 0:  min s_z  s.t.  s_a - sum w s_t >= viol_row
    LinearProgram lp;
    lp.num_vars = cone.node_count;
    lp.objective.assign(cone.node_count, 0.0);
    lp.objective[z] = 1.0;
    for (const auto& row : cone.rows) {
        double viol = gv[row.anchor];
        std::vector<std::pair<int, double>> entries;
        entries.emplace_back(row.anchor, 1.0);
        for (auto [j, w] : row.taps) {
            viol -= w * gv[j];
            entries.emplace_back(j, -w);
        }
        lp.add_row(std::move(entries), LinearProgram::Rel::GE, viol);
    }
    LPSolution sol = lp_solve_verified(lp);
    if (sol.infeasible) throw std::runtime_error("envelope_lp: infeasible (solver bug)");
    return gv[z] - sol.objective;
}

struct JensenCertificate {
    std::uint32_t barycenter_flat = 0;
    std::vector<std::pair<std::uint32_t, double>> weights;  // (flat node, weight > 0)
    double objective = 0.0;
    double weight_sum = 0.0;
    double dual_feasibility_residual = 0.0;  // || R^T y + mu - e_z ||_inf, recomputed
};

// inf { integral of g d(mu) : mu a discrete Jensen measure at z }  via the
// dual LP, solved independently of the primal.
inline JensenCertificate jensen_lp(const GridFunction& g, const ConeLP& cone,
                                   std::uint32_t z_flat) {
    auto gv = dense_values(cone, g);
    int z = cone.flat_to_dense[z_flat];
    if (z < 0) throw std::invalid_argument("jensen_lp: node outside the domain");
    const std::size_t m = cone.rows.size(), n = cone.node_count;
    // variables: y_r >= 0 (rows), mu_i >= 0;  R^T y + mu = e_z;  min g . mu
    LinearProgram lp;
    lp.num_vars = m + n;
    lp.objective.assign(m + n, 0.0);
    for (std::size_t i = 0; i < n; ++i) lp.objective[m + i] = gv[i];
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (std::size_t r = 0; r < m; ++r) {
        cols[cone.rows[r].anchor].emplace_back(static_cast<int>(r), 1.0);
        for (auto [j, w] : cone.rows[r].taps)
            cols[j].emplace_back(static_cast<int>(r), -w);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto entries = cols[i];
        entries.emplace_back(static_cast<int>(m + i), 1.0);
        lp.add_row(std::move(entries), LinearProgram::Rel::EQ,
                   static_cast<int>(i) == z ? 1.0 : 0.0);
    }
    LPSolution sol = lp_solve_verified(lp);
    if (sol.infeasible)
        throw std::runtime_error("jensen_lp: infeasible (point mass is always feasible)");

    JensenCertificate cert;
    cert.barycenter_flat = z_flat;
    cert.objective = sol.objective;
    std::vector<double> residual(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        double y = sol.x[r];
        if (y == 0.0) continue;
        residual[cone.rows[r].anchor] += y;
        for (auto [j, w] : cone.rows[r].taps) residual[j] -= w * y;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double mu = sol.x[m + i];
        cert.weight_sum += mu;
        residual[i] += mu;
        if (static_cast<int>(i) == z) residual[i] -= 1.0;
        if (mu > 1e-12) cert.weights.emplace_back(cone.dense_to_flat[i], mu);
    }
    double rmax = 0.0;
    for (double r : residual) rmax = std::max(rmax, std::abs(r));
    cert.dual_feasibility_residual = rmax;
    return cert;
}

// Check a certificate against explicit cone members: u(z) <= integral u d(mu).
inline double certificate_defect(const JensenCertificate& cert, const GridFunction& member) {
    double integral = 0.0;
    for (auto [f, w] : cert.weights) integral += w * member.values[f];
    return member.values[cert.barycenter_flat] - integral;
}

inline double duality_gap(const GridFunction& g, const ConeLP& cone, std::uint32_t z_flat) {
    double s = envelope_lp(g, cone, z_flat);
    auto cert = jensen_lp(g, cone, z_flat);
    return std::abs(s - cert.objective);
}

}  // namespace pshlab
