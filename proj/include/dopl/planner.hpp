#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dopl/lp.hpp"
#include "dopl/preference.hpp"
#include "dopl/transition.hpp"
#include "dopl/world.hpp"

namespace dopl {

// ---------------------------------------------------------------------------
// Exact average-reward LP over state-action occupancy measures mu_n(s,a).
// Used by the oracle (true kernels and rewards) and by point-estimate
// planners. Variable layout: (n * S + s) * 2 + a.
// ---------------------------------------------------------------------------

inline int mu_id(int n, int s, int a, int n_states) {
    return (n * n_states + s) * 2 + a;
}

inline LinearProgram build_exact_lp(const std::vector<ArmDynamics>& dynamics,
                                    const std::vector<std::vector<double>>& values, int budget) {
    const int N = static_cast<int>(dynamics.size());
    if (N == 0) throw std::invalid_argument("no arms");
    const int S = static_cast<int>(dynamics[0].passive.size());
    LinearProgram lp;
    lp.n_vars = N * S * 2;
    lp.objective.assign(lp.n_vars, 0.0);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a) lp.objective[mu_id(n, s, a, S)] = values[n][s];

    LinearProgram::Row bud;
    bud.a.assign(lp.n_vars, 0.0);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s) bud.a[mu_id(n, s, 1, S)] = 1.0;
    bud.rhs = static_cast<double>(budget);
    lp.ub.push_back(std::move(bud));

    for (int n = 0; n < N; ++n) {
        LinearProgram::Row norm;
        norm.a.assign(lp.n_vars, 0.0);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a) norm.a[mu_id(n, s, a, S)] = 1.0;
        norm.rhs = 1.0;
        lp.eq.push_back(std::move(norm));

        // stationarity: outflow of s equals probability-weighted inflow
        for (int s = 0; s < S; ++s) {
            LinearProgram::Row flow;
            flow.a.assign(lp.n_vars, 0.0);
            for (int a = 0; a < 2; ++a) flow.a[mu_id(n, s, a, S)] += 1.0;
            for (int sp = 0; sp < S; ++sp)
                for (int a = 0; a < 2; ++a)
                    flow.a[mu_id(n, sp, a, S)] -= dynamics[n].kernel(a)[sp][s];
            flow.rhs = 0.0;
            lp.eq.push_back(std::move(flow));
        }
    }
    return lp;
}

// ---------------------------------------------------------------------------
// Extended LP over omega_n(s,a,s'), which folds the transition confidence
// ball into linear rows. Variable layout: ((n * S + s) * 2 + a) * S + s'.
// ---------------------------------------------------------------------------

inline int omega_id(int n, int s, int a, int sp, int n_states) {
    return ((n * n_states + s) * 2 + a) * n_states + sp;
}

inline LinearProgram build_elp(const TransitionView& view, const PreferenceEstimate& pref,
                               int budget) {
    const int N = static_cast<int>(view.kernels.size());
    const int S = view.n_states;
    LinearProgram lp;
    lp.n_vars = N * S * 2 * S;
    lp.objective.assign(lp.n_vars, 0.0);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s) {
            double q = pref.q_tilde[n][s];
            for (int a = 0; a < 2; ++a)
                for (int sp = 0; sp < S; ++sp) lp.objective[omega_id(n, s, a, sp, S)] = q;
        }

    LinearProgram::Row bud;
    bud.a.assign(lp.n_vars, 0.0);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s)
            for (int sp = 0; sp < S; ++sp) bud.a[omega_id(n, s, 1, sp, S)] = 1.0;
    bud.rhs = static_cast<double>(budget);
    lp.ub.push_back(std::move(bud));

    for (int n = 0; n < N; ++n) {
        LinearProgram::Row norm;
        norm.a.assign(lp.n_vars, 0.0);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a)
                for (int sp = 0; sp < S; ++sp) norm.a[omega_id(n, s, a, sp, S)] = 1.0;
        norm.rhs = 1.0;
        lp.eq.push_back(std::move(norm));

        for (int s = 0; s < S; ++s) {
            LinearProgram::Row flow;
            flow.a.assign(lp.n_vars, 0.0);
            for (int a = 0; a < 2; ++a)
                for (int sp = 0; sp < S; ++sp) flow.a[omega_id(n, s, a, sp, S)] += 1.0;
            for (int spp = 0; spp < S; ++spp)
                for (int a = 0; a < 2; ++a) flow.a[omega_id(n, spp, a, s, S)] -= 1.0;
            flow.rhs = 0.0;
            lp.eq.push_back(std::move(flow));
        }

        // confidence ball, linearized: for each (s,a,s') the conditional
        // probability omega / sum_y omega must sit inside [lb, ub]. Rows that
        // cannot bind are skipped.
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a) {
                double d = view.delta(n, s, a);
                for (int sp = 0; sp < S; ++sp) {
                    double p = view.kernels[n].kernel(a)[s][sp];
                    double hi = std::min(1.0, p + d);
                    double lo = std::max(0.0, p - d);
                    if (hi < 1.0) {
                        LinearProgram::Row r;
                        r.a.assign(lp.n_vars, 0.0);
                        for (int y = 0; y < S; ++y) r.a[omega_id(n, s, a, y, S)] = -hi;
                        r.a[omega_id(n, s, a, sp, S)] += 1.0;
                        r.rhs = 0.0;
                        lp.ub.push_back(std::move(r));
                    }
                    if (lo > 0.0) {
                        LinearProgram::Row r;
                        r.a.assign(lp.n_vars, 0.0);
                        for (int y = 0; y < S; ++y) r.a[omega_id(n, s, a, y, S)] = lo;
                        r.a[omega_id(n, s, a, sp, S)] -= 1.0;
                        r.rhs = 0.0;
                        lp.ub.push_back(std::move(r));
                    }
                }
            }
    }
    return lp;
}

// Optimal-face preference for the extended LP: when many occupancies tie on
// the optimistic objective (common while every q_tilde sits at the same
// clamp), prefer the one spending the most activation mass. Idle budget
// yields no comparisons and no active-kernel samples, so of the equally good
// plans a busy one is the right one to learn from. Remaining ties rotate a
// preferred block of arms during an initial burn-in, so every arm's active
// kernel gets sampled and no confidence ball stays vacuous; afterwards they
// resolve toward low arm ids, because a plan that keeps wandering across
// equally optimistic subsets spreads the comparisons too thin to tighten
// anything. Weights are scaled so each tier only breaks ties within the
// previous tier; the final index ramp makes the vertex unique.
inline std::vector<double> elp_activation_bias(int n_arms, int n_states, int budget, int episode) {
    const int n_vars = n_arms * n_states * 2 * n_states;
    const int sweep = (n_arms + budget - 1) / budget;  // episodes per full rotation
    const int burn_in = 8 * sweep;
    std::vector<double> bias(n_vars, 0.0);
    for (int j = 0; j < n_vars; ++j) {
        int a = (j / n_states) % 2;
        int n = j / (n_states * 2 * n_states);
        double w = 0.0;
        if (a == 1) {
            double tie;
            if (episode <= burn_in) {
                int start = ((episode - 1) * budget) % n_arms;
                int off = (n - start + n_arms) % n_arms;
                tie = off < budget ? 1.0 : 0.0;
            } else {
                tie = static_cast<double>(n_arms - n) / n_arms;
            }
            w = 1.0 + 1e-3 * tie;
        }
        bias[j] = w + 1e-6 * (static_cast<double>(n_vars - j) / n_vars);
    }
    return bias;
}

// ---------------------------------------------------------------------------
// Index extraction. The activation index of (n,s) is the conditional
// probability of acting in that state under the occupancy solution; an
// unvisited state (zero occupancy mass) gets index 0.
// ---------------------------------------------------------------------------

inline double direct_index(double active_mass, double total_mass) {
    if (total_mass < 1e-12) return 0.0;
    return active_mass / total_mass;
}

inline std::vector<std::vector<double>> index_table_from_omega(const std::vector<double>& x, int N,
                                                               int S) {
    std::vector<std::vector<double>> idx(N, std::vector<double>(S, 0.0));
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s) {
            double act = 0.0, tot = 0.0;
            for (int sp = 0; sp < S; ++sp) {
                act += x[omega_id(n, s, 1, sp, S)];
                tot += x[omega_id(n, s, 0, sp, S)] + x[omega_id(n, s, 1, sp, S)];
            }
            idx[n][s] = direct_index(act, tot);
        }
    return idx;
}

inline std::vector<std::vector<double>> index_table_from_mu(const std::vector<double>& x, int N,
                                                            int S) {
    std::vector<std::vector<double>> idx(N, std::vector<double>(S, 0.0));
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s) {
            double act = x[mu_id(n, s, 1, S)];
            double tot = act + x[mu_id(n, s, 0, S)];
            idx[n][s] = direct_index(act, tot);
        }
    return idx;
}

// Pick the budget arms with the highest index at their current state,
// breaking ties toward the smaller arm id.
inline std::vector<int> select_top_b(const std::vector<std::vector<double>>& index,
                                     const std::vector<int>& states, int budget) {
    const int N = static_cast<int>(index.size());
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double va = index[a][states[a]], vb = index[b][states[b]];
        if (va != vb) return va > vb;
        return a < b;
    });
    order.resize(std::min<int>(budget, N));
    std::sort(order.begin(), order.end());
    return order;
}

// Long-run average reward of the optimal stationary policy, via the exact LP.
inline double optimal_gain(const WorldModel& world, const LpOptions& opt = {}) {
    auto lp = build_exact_lp(world.dynamics(), world.reward_table(), world.budget);
    auto sol = solve_lp(lp, opt);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("oracle planning LP failed");
    return sol.objective_value;
}

}  // namespace dopl
