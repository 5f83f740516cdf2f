#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dopl {

// Maximization over x >= 0 with equality and <= rows, dense.
struct LinearProgram {
    struct Row {
        std::vector<double> a;
        double rhs = 0.0;
    };
    int n_vars = 0;
    std::vector<double> objective;
    std::vector<Row> eq;
    std::vector<Row> ub;
};

enum class LpStatus { optimal, infeasible, numerical_failure };

struct LpSolution {
    LpStatus status = LpStatus::numerical_failure;
    std::vector<double> x;
    double objective_value = 0.0;
    int iterations = 0;
    std::string message;
};

struct LpOptions {
    double tol = 1e-9;
    int max_iters = 200000;
    // Deterministic resolution of degenerate optimal faces: after reaching
    // an optimal vertex, re-optimize a fixed variable-index-ordered weight
    // vector inside the optimal face. Identical programs then always return
    // the identical vertex, and fully tied faces resolve toward low-index
    // variables. Disable for raw behavior.
    bool refine_vertex = true;
    // When set (size n_vars), the refinement maximizes this weight vector on
    // the optimal face instead of the low-index ramp. Lets callers pick which
    // of the equally optimal solutions they get back.
    std::vector<double> refine_bias;
};

// Dense two-phase primal tableau simplex. Dantzig pricing with smallest-index
// tie-breaks; Bland's rule after a stall, which guarantees termination.
class SimplexSolver {
public:
    SimplexSolver(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
        build_tableau();
    }

    LpSolution solve() {
        LpSolution sol;

        // phase 1: drive artificials to zero
        if (n_art_ > 0) {
            std::vector<double> cost(ncols_, 0.0);
            for (int j = art_begin_; j < art_begin_ + n_art_; ++j) cost[j] = 1.0;
            load_cost(cost);
            int rc = run_phase();
            if (rc != 0) return fail(sol, rc);
            if (objective_of(cost) > 1e-7) {
                sol.status = LpStatus::infeasible;
                sol.iterations = iters_;
                sol.message = "phase 1 left artificial infeasibility";
                return sol;
            }
            purge_artificials();
        }
        for (int j = art_begin_; j < art_begin_ + n_art_; ++j) eligible_[j] = 0;

        // phase 2: the real objective (minimization form)
        std::vector<double> cost(ncols_, 0.0);
        for (int j = 0; j < lp_.n_vars; ++j) cost[j] = -lp_.objective[j];
        load_cost(cost);
        int rc = run_phase();
        if (rc != 0) return fail(sol, rc);

        if (opt_.refine_vertex) refine_within_face(cost);

        sol.status = LpStatus::optimal;
        sol.x.assign(lp_.n_vars, 0.0);
        for (int i = 0; i < m_; ++i)
            if (row_active_[i] && basis_[i] < lp_.n_vars) sol.x[basis_[i]] = rhs(i);
        for (auto& v : sol.x)
            if (v < 0.0 && v > -1e-9) v = 0.0;
        sol.objective_value = 0.0;
        for (int j = 0; j < lp_.n_vars; ++j) sol.objective_value += lp_.objective[j] * sol.x[j];
        sol.iterations = iters_;
        return sol;
    }

private:
    double& at(int i, int j) { return tab_[static_cast<size_t>(i) * ncols_ + j]; }
    double at(int i, int j) const { return tab_[static_cast<size_t>(i) * ncols_ + j]; }
    double rhs(int i) const { return at(i, ncols_ - 1); }

    void build_tableau() {
        const int n = lp_.n_vars;
        if (static_cast<int>(lp_.objective.size()) != n)
            throw std::invalid_argument("objective length mismatch");
        m_ = static_cast<int>(lp_.eq.size() + lp_.ub.size());

        // count slack/surplus and artificial columns after rhs normalization
        n_slack_ = static_cast<int>(lp_.ub.size());
        n_art_ = static_cast<int>(lp_.eq.size());
        for (const auto& r : lp_.ub)
            if (r.rhs < 0.0) ++n_art_;  // becomes a >= row, needs an artificial too

        slack_begin_ = n;
        art_begin_ = n + n_slack_;
        ncols_ = n + n_slack_ + n_art_ + 1;
        tab_.assign(static_cast<size_t>(m_) * ncols_, 0.0);
        basis_.assign(m_, -1);
        row_active_.assign(m_, 1);
        eligible_.assign(ncols_ - 1, 1);

        int next_art = art_begin_;
        int i = 0;
        for (const auto& r : lp_.ub) {
            if (static_cast<int>(r.a.size()) != n)
                throw std::invalid_argument("constraint row length mismatch");
            double sign = (r.rhs < 0.0) ? -1.0 : 1.0;
            for (int j = 0; j < n; ++j) at(i, j) = sign * r.a[j];
            at(i, ncols_ - 1) = sign * r.rhs;
            at(i, slack_begin_ + i) = sign;  // slack, or surplus when flipped
            if (sign < 0.0) {
                at(i, next_art) = 1.0;
                basis_[i] = next_art++;
            } else {
                basis_[i] = slack_begin_ + i;
            }
            ++i;
        }
        for (const auto& r : lp_.eq) {
            if (static_cast<int>(r.a.size()) != n)
                throw std::invalid_argument("constraint row length mismatch");
            double sign = (r.rhs < 0.0) ? -1.0 : 1.0;
            for (int j = 0; j < n; ++j) at(i, j) = sign * r.a[j];
            at(i, ncols_ - 1) = sign * r.rhs;
            at(i, next_art) = 1.0;
            basis_[i] = next_art++;
            ++i;
        }
    }

    // reduced-cost row for the given cost vector at the current basis
    void load_cost(const std::vector<double>& cost) {
        z_.assign(ncols_, 0.0);
        for (int j = 0; j < ncols_ - 1; ++j) z_[j] = cost[j];
        for (int i = 0; i < m_; ++i) {
            if (!row_active_[i]) continue;
            double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j < ncols_; ++j) z_[j] -= cb * at(i, j);
        }
    }

    double objective_of(const std::vector<double>& cost) const {
        double v = 0.0;
        for (int i = 0; i < m_; ++i)
            if (row_active_[i]) v += cost[basis_[i]] * rhs(i);
        return v;
    }

    // returns 0 ok, 1 iteration limit, 2 unbounded
    int run_phase() {
        int stall = 0;
        bool bland = false;
        while (true) {
            if (iters_ >= opt_.max_iters) return 1;
            int pc = -1;
            if (!bland) {
                double best = -opt_.tol;
                for (int j = 0; j < ncols_ - 1; ++j)
                    if (eligible_[j] && z_[j] < best) {
                        best = z_[j];
                        pc = j;
                    }
            } else {
                for (int j = 0; j < ncols_ - 1; ++j)
                    if (eligible_[j] && z_[j] < -opt_.tol) {
                        pc = j;
                        break;
                    }
            }
            if (pc < 0) return 0;  // optimal for this cost

            int pr = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (!row_active_[i]) continue;
                double a = at(i, pc);
                if (a <= opt_.tol) continue;
                double ratio = rhs(i) / a;
                if (pr < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && basis_[i] < basis_[pr])) {
                    pr = i;
                    best_ratio = ratio;
                }
            }
            if (pr < 0) return 2;

            if (best_ratio < 1e-12) {
                if (++stall > 200) bland = true;
            } else {
                stall = 0;
            }
            pivot(pr, pc);
            ++iters_;
        }
    }

    void pivot(int pr, int pc) {
        double piv = at(pr, pc);
        double* prow = &tab_[static_cast<size_t>(pr) * ncols_];
        double inv = 1.0 / piv;
        for (int j = 0; j < ncols_; ++j) prow[j] *= inv;
        prow[pc] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == pr || !row_active_[i]) continue;
            double f = at(i, pc);
            if (f == 0.0) continue;
            double* row = &tab_[static_cast<size_t>(i) * ncols_];
            for (int j = 0; j < ncols_; ++j) row[j] -= f * prow[j];
            row[pc] = 0.0;
        }
        double fz = z_[pc];
        if (fz != 0.0) {
            for (int j = 0; j < ncols_; ++j) z_[j] -= fz * prow[j];
            z_[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    // pivot basic artificials out after phase 1, dropping dependent rows
    void purge_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (!row_active_[i] || basis_[i] < art_begin_) continue;
            int pc = -1;
            for (int j = 0; j < art_begin_; ++j)
                if (eligible_[j] && std::abs(at(i, j)) > 1e-7) {
                    pc = j;
                    break;
                }
            if (pc >= 0) {
                pivot(i, pc);
                ++iters_;
            } else {
                row_active_[i] = 0;  // redundant constraint
            }
        }
    }

    // Deterministic degenerate-vertex resolution: maximize a fixed strictly
    // decreasing index weight inside the optimal face of the true objective.
    // Only columns whose true reduced cost is ~0 stay eligible, so the true
    // objective is preserved up to pivot tolerance.
    void refine_within_face(const std::vector<double>& true_cost) {
        std::vector<char> saved = eligible_;
        for (int j = 0; j < ncols_ - 1; ++j)
            if (eligible_[j] && z_[j] > opt_.tol) eligible_[j] = 0;
        std::vector<double> cost(ncols_, 0.0);
        const bool custom = static_cast<int>(opt_.refine_bias.size()) == lp_.n_vars;
        for (int j = 0; j < lp_.n_vars; ++j)
            cost[j] = custom ? -opt_.refine_bias[j]
                             : -(static_cast<double>(lp_.n_vars - j) / lp_.n_vars);
        load_cost(cost);
        run_phase();  // limit or unbounded here cannot occur on a bounded face; extra pivots are harmless
        eligible_ = saved;
        (void)true_cost;
    }

    LpSolution fail(LpSolution& sol, int rc) {
        sol.status = LpStatus::numerical_failure;
        sol.iterations = iters_;
        sol.message = (rc == 1) ? "iteration limit reached" : "objective unbounded";
        return sol;
    }

    const LinearProgram& lp_;
    LpOptions opt_;
    int m_ = 0, ncols_ = 0, n_slack_ = 0, n_art_ = 0, slack_begin_ = 0, art_begin_ = 0;
    std::vector<double> tab_;
    std::vector<double> z_;
    std::vector<int> basis_;
    std::vector<char> row_active_;
    std::vector<char> eligible_;
    int iters_ = 0;
};

inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
    SimplexSolver solver(lp, opt);
    return solver.solve();
}

// Textual dump in the common LP interchange layout, for external cross-checks.
inline void dump_lp(const LinearProgram& lp, std::ostream& os) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    os << "Maximize\n obj:";
    for (int j = 0; j < lp.n_vars; ++j)
        if (lp.objective[j] != 0.0)
            os << " " << (lp.objective[j] >= 0 ? "+" : "-") << " " << num(std::abs(lp.objective[j]))
               << " x" << j;
    os << "\nSubject To\n";
    int ci = 0;
    auto row_out = [&](const LinearProgram::Row& r, const char* rel) {
        os << " c" << ci++ << ":";
        for (int j = 0; j < lp.n_vars; ++j)
            if (r.a[j] != 0.0)
                os << " " << (r.a[j] >= 0 ? "+" : "-") << " " << num(std::abs(r.a[j])) << " x" << j;
        os << " " << rel << " " << num(r.rhs) << "\n";
    };
    for (const auto& r : lp.ub) row_out(r, "<=");
    for (const auto& r : lp.eq) row_out(r, "=");
    os << "Bounds\n";
    for (int j = 0; j < lp.n_vars; ++j) os << " 0 <= x" << j << "\n";
    os << "End\n";
}

}  // namespace dopl
