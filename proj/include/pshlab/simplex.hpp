#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace pshlab {

// Dense two-phase primal simplex with Bland's anti-cycling rule.
// Small problems only; determinism and auditability over speed.
struct LinearProgram {
    enum class Rel { LE, GE, EQ };
    std::size_t num_vars = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // sparse row entries
    std::vector<double> rhs;
    std::vector<Rel> rel;
    std::vector<double> objective;  // minimize objective . x, x >= 0

    void add_row(std::vector<std::pair<int, double>> entries, Rel r, double b) {
        rows.push_back(std::move(entries));
        rel.push_back(r);
        rhs.push_back(b);
    }
};

struct LPSolution {
    bool optimal = false;
    bool infeasible = false;
    double objective = 0.0;
    std::vector<double> x;
};

namespace detail {

class SimplexTableau {
  public:
    SimplexTableau(const LinearProgram& lp, const std::vector<int>& var_perm) {
        m_ = lp.rows.size();
        n_struct_ = lp.num_vars;
        // columns: structural (permuted), then slack/surplus, then artificial
        std::size_t n_slack = 0;
        for (auto r : lp.rel)
            if (r != LinearProgram::Rel::EQ) ++n_slack;
        n_total_ = n_struct_ + n_slack + m_;
        T_.assign(m_ + 1, std::vector<double>(n_total_ + 1, 0.0));
        basis_.assign(m_, -1);

        std::vector<int> inv(n_struct_);
        for (std::size_t j = 0; j < n_struct_; ++j) inv[var_perm[j]] = static_cast<int>(j);

        std::size_t slack_at = n_struct_;
        art_begin_ = n_struct_ + n_slack;
        for (std::size_t i = 0; i < m_; ++i) {
            double b = lp.rhs[i];
            double sgn = b < 0 ? -1.0 : 1.0;
            auto r = lp.rel[i];
            if (b < 0) {
                if (r == LinearProgram::Rel::LE) r = LinearProgram::Rel::GE;
                else if (r == LinearProgram::Rel::GE) r = LinearProgram::Rel::LE;
            }
            for (auto [j, v] : lp.rows[i]) T_[i][inv[j]] += sgn * v;
            T_[i][n_total_] = sgn * b;
            if (r == LinearProgram::Rel::LE) {
                T_[i][slack_at] = 1.0;
                basis_[i] = static_cast<int>(slack_at);
                ++slack_at;
            } else if (r == LinearProgram::Rel::GE) {
                T_[i][slack_at] = -1.0;
                ++slack_at;
            }
            if (basis_[i] < 0) {
                std::size_t a = art_begin_ + i;
                T_[i][a] = 1.0;
                basis_[i] = static_cast<int>(a);
            }
        }
        obj_.assign(n_total_, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) obj_[j] = lp.objective[var_perm[j]];
    }

    bool phase1() {
        std::vector<double> z(n_total_ + 1, 0.0);
        for (std::size_t j = art_begin_; j < n_total_; ++j) z[j] = 1.0;
        price_out(z);
        run(z);
        return z[n_total_] > -1e-7;  // sum of artificials ~ 0
    }

    void phase2() {
        // drive leftover artificial basics out or mark their rows degenerate
        for (std::size_t i = 0; i < m_; ++i) {
            if (static_cast<std::size_t>(basis_[i]) < art_begin_) continue;
            int piv = -1;
            for (std::size_t j = 0; j < art_begin_; ++j)
                if (std::abs(T_[i][j]) > 1e-9) { piv = static_cast<int>(j); break; }
            if (piv >= 0) pivot(i, piv);
        }
        std::vector<double> z(n_total_ + 1, 0.0);
        for (std::size_t j = 0; j < n_total_; ++j) z[j] = obj_[j];
        price_out(z);
        run(z, /*forbid_artificial=*/true);
        objective_ = -z[n_total_];
        x_.assign(n_struct_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (static_cast<std::size_t>(basis_[i]) < n_struct_)
                x_[basis_[i]] = T_[i][n_total_];
    }

    double objective_value() const { return objective_; }
    const std::vector<double>& solution() const { return x_; }

  private:
    void price_out(std::vector<double>& z) {
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = z[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= n_total_; ++j) z[j] -= cb * T_[i][j];
        }
        // keep z expressed as reduced costs with z[n] = -objective
    }

    void run(std::vector<double>& z, bool forbid_artificial = false) {
        const double eps = 1e-10;
        std::size_t limit = forbid_artificial ? art_begin_ : n_total_;
        for (;;) {
            int enter = -1;  // Bland: lowest index with negative reduced cost
            for (std::size_t j = 0; j < limit; ++j)
                if (z[j] < -eps) { enter = static_cast<int>(j); break; }
            if (enter < 0) return;
            int leave = -1;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                double a = T_[i][enter];
                if (a > eps) {
                    double ratio = T_[i][n_total_] / a;
                    if (leave < 0 || ratio < best - 1e-12 ||
                        (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[leave]))
                    {
                        best = ratio;
                        leave = static_cast<int>(i);
                    }
                }
            }
            if (leave < 0) throw std::runtime_error("simplex: unbounded problem");
            pivot(static_cast<std::size_t>(leave), enter);
            double cb = z[enter];
            if (cb != 0.0)
                for (std::size_t j = 0; j <= n_total_; ++j) z[j] -= cb * T_[leave][j];
        }
    }

    void pivot(std::size_t r, int c) {
        double p = T_[r][c];
        for (auto& v : T_[r]) v /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double f = T_[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_total_; ++j) T_[i][j] -= f * T_[r][j];
        }
        basis_[r] = c;
    }

    std::size_t m_ = 0, n_struct_ = 0, n_total_ = 0, art_begin_ = 0;
    std::vector<std::vector<double>> T_;
    std::vector<double> obj_;
    std::vector<int> basis_;
    double objective_ = 0.0;
    std::vector<double> x_;
};

}  // namespace detail

inline LPSolution lp_solve(const LinearProgram& lp, std::uint64_t perm_seed = 0) {
    std::vector<int> perm(lp.num_vars);
    std::iota(perm.begin(), perm.end(), 0);
    if (perm_seed != 0) {
        std::mt19937_64 rng(perm_seed);
        std::shuffle(perm.begin(), perm.end(), rng);
    }
    detail::SimplexTableau tab(lp, perm);
    LPSolution sol;
    if (!tab.phase1()) {
        sol.infeasible = true;
        return sol;
    }
    tab.phase2();
    sol.optimal = true;
    sol.objective = tab.objective_value();
    const auto& xp = tab.solution();
    sol.x.assign(lp.num_vars, 0.0);
    for (std::size_t j = 0; j < lp.num_vars; ++j) sol.x[perm[j]] = xp[j];
    return sol;
}

// Solve twice, the second time from a permuted column order, and insist the
// optima agree. Guards against a silently wrong pivot path.
inline LPSolution lp_solve_verified(const LinearProgram& lp, double tol = 1e-8,
                                    std::uint64_t seed = 0x9e3779b97f4a7c15ull) {
    LPSolution a = lp_solve(lp, 0);
    LPSolution b = lp_solve(lp, seed);
    if (a.infeasible != b.infeasible)
        throw std::runtime_error("simplex verification: feasibility mismatch");
    if (a.optimal && std::abs(a.objective - b.objective) > tol * (1.0 + std::abs(a.objective)))
        throw std::runtime_error("simplex verification: objective mismatch");
    return a;
}

}  // namespace pshlab
