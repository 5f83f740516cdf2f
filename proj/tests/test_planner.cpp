#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dopl/planner.hpp"
#include "dopl/rng.hpp"
#include "dopl/world.hpp"

using namespace dopl;

namespace {

// one arm, two states: active drives to state 1, passive drives to state 0
std::vector<ArmDynamics> toy_dynamics() {
    ArmDynamics d;
    d.passive = {{1.0, 0.0}, {1.0, 0.0}};
    d.active = {{0.0, 1.0}, {0.0, 1.0}};
    return {d};
}

// stationary distribution of the lazy mixed chain under activation mix pi
std::vector<double> stationary(const ArmDynamics& dyn, const std::vector<double>& pi) {
    const int S = static_cast<int>(pi.size());
    std::vector<double> rho(S, 1.0 / S), next(S);
    for (int it = 0; it < 400; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s)
            for (int sp = 0; sp < S; ++sp) {
                double p = (1.0 - pi[s]) * dyn.passive[s][sp] + pi[s] * dyn.active[s][sp];
                next[sp] += rho[s] * p;
            }
        for (int s = 0; s < S; ++s) rho[s] = 0.5 * rho[s] + 0.5 * next[s];
    }
    return rho;
}

TransitionView exact_view(const WorldModel& world, double width_value) {
    TransitionView v;
    v.n_states = world.n_states();
    v.kernels = world.dynamics();
    v.width.assign(world.size(), std::vector<double>(world.n_states() * 2, width_value));
    return v;
}

PreferenceEstimate pref_with_q(const std::vector<std::vector<double>>& q) {
    PreferenceEstimate p;
    p.n_arms = static_cast<int>(q.size());
    p.n_states = static_cast<int>(q[0].size());
    p.q_tilde = q;
    return p;
}

}  // namespace

TEST(ExactLp, ToyArmAlwaysActive) {
    std::vector<std::vector<double>> values = {{0.0, 1.0}};
    auto lp = build_exact_lp(toy_dynamics(), values, 1);
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 1.0, 1e-9);
    EXPECT_NEAR(sol.x[mu_id(0, 1, 1, 2)] + sol.x[mu_id(0, 1, 0, 2)], 1.0, 1e-9);
}

TEST(ExactLp, ZeroValuesGiveZero) {
    auto world = build_cpap();
    std::vector<std::vector<double>> zeros(world.size(),
                                           std::vector<double>(world.n_states(), 0.0));
    auto lp = build_exact_lp(world.dynamics(), zeros, world.budget);
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 0.0, 1e-9);
}

TEST(ExactLp, DominatesRandomFeasiblePoints) {
    auto world = build_cpap();
    const int N = world.size(), S = world.n_states(), B = world.budget;
    double star = optimal_gain(world);
    Rng rng(11);
    int checked = 0;
    while (checked < 200) {
        std::vector<std::vector<double>> pi(N, std::vector<double>(S));
        for (auto& row : pi)
            for (auto& v : row) v = rng.uniform01() * static_cast<double>(B) / N;
        double active = 0.0, value = 0.0;
        for (int n = 0; n < N; ++n) {
            auto rho = stationary(world.arms[n].dynamics(), pi[n]);
            for (int s = 0; s < S; ++s) {
                active += rho[s] * pi[n][s];
                value += rho[s] * world.arms[n].rewards[s];
            }
        }
        if (active > B) continue;
        EXPECT_LE(value, star + 1e-6);
        ++checked;
    }
}

TEST(ExactLp, FrozenOptimalGains) {
    EXPECT_NEAR(optimal_gain(build_cpap()), 15.900403299471208, 1e-9);
    EXPECT_NEAR(optimal_gain(build_app_marketing()), 6.782476190476, 1e-9);
}

TEST(ExactLp, OracleOccupancyRespectsBudget) {
    auto world = build_cpap();
    auto lp = build_exact_lp(world.dynamics(), world.reward_table(), world.budget);
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    double active = 0.0;
    for (int n = 0; n < world.size(); ++n)
        for (int s = 0; s < world.n_states(); ++s) active += sol.x[mu_id(n, s, 1, world.n_states())];
    EXPECT_LE(active, world.budget + 1e-6);
}

TEST(ExactLp, ScaleInvarianceOfActivation) {
    auto world = build_cpap();
    const int N = world.size(), S = world.n_states();
    auto values = world.reward_table();
    auto lp = build_exact_lp(world.dynamics(), values, world.budget);
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);

    const double c = 2.75;
    auto shifted = values;
    for (auto& row : shifted)
        for (auto& v : row) v += c;
    auto lp2 = build_exact_lp(world.dynamics(), shifted, world.budget);
    auto sol2 = solve_lp(lp2);
    ASSERT_EQ(sol2.status, LpStatus::optimal);

    EXPECT_NEAR(sol2.objective_value, sol.objective_value + N * c, 1e-6);
    auto idx = index_table_from_mu(sol.x, N, S);
    auto idx2 = index_table_from_mu(sol2.x, N, S);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s) EXPECT_NEAR(idx2[n][s], idx[n][s], 1e-6);
    std::vector<int> states(N, 0);
    EXPECT_EQ(select_top_b(idx, states, world.budget), select_top_b(idx2, states, world.budget));
}

TEST(Elp, DegenerateBallMatchesExactLp) {
    auto world = build_cpap();
    auto values = world.reward_table();
    auto exact = solve_lp(build_exact_lp(world.dynamics(), values, world.budget));
    ASSERT_EQ(exact.status, LpStatus::optimal);

    auto elp = build_elp(exact_view(world, 0.0), pref_with_q(values), world.budget);
    auto sol = solve_lp(elp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, exact.objective_value, 1e-6);
}

TEST(Elp, VacuousBallHitsPerArmMaximum) {
    auto world = build_app_marketing();
    auto values = world.reward_table();
    auto sol = solve_lp(build_elp(exact_view(world, 1.0), pref_with_q(values), world.budget));
    ASSERT_EQ(sol.status, LpStatus::optimal);
    double bound = 0.0;
    for (const auto& row : values) bound += *std::max_element(row.begin(), row.end());
    EXPECT_NEAR(sol.objective_value, bound, 1e-6);

    double exact = optimal_gain(world);
    EXPECT_GE(sol.objective_value + 1e-9, exact);
}

TEST(Elp, OptimismOverTruthInsideBall) {
    Rng rng(21);
    auto world = build_cpap();
    const int N = world.size(), S = world.n_states();
    auto values = world.reward_table();
    double exact = optimal_gain(world);

    for (int trial = 0; trial < 5; ++trial) {
        // center the ball on a perturbed kernel but keep the truth inside
        TransitionView v;
        v.n_states = S;
        v.width.assign(N, std::vector<double>(S * 2, 0.0));
        for (int n = 0; n < N; ++n) {
            ArmDynamics d = world.arms[n].dynamics();
            for (int a = 0; a < 2; ++a) {
                auto& k = a == 0 ? d.passive : d.active;
                for (int s = 0; s < S; ++s) {
                    double bump = 0.05 * rng.uniform01();
                    double mass = 0.0;
                    for (int sp = 0; sp < S; ++sp) {
                        k[s][sp] = k[s][sp] * (1.0 - bump) + bump / S;
                        mass = std::max(mass,
                                        std::abs(k[s][sp] - world.arms[n].kernel(a)[s][sp]));
                    }
                    v.width[n][s * 2 + a] = mass + 0.01;
                }
            }
            v.kernels.push_back(std::move(d));
        }
        auto sol = solve_lp(build_elp(v, pref_with_q(values), world.budget));
        ASSERT_EQ(sol.status, LpStatus::optimal);
        EXPECT_GE(sol.objective_value + 1e-6, exact);
    }
}

TEST(Elp, SolutionStaysInsideConfidenceBall) {
    auto world = build_cpap();
    const int N = world.size(), S = world.n_states();
    auto view = exact_view(world, 0.08);
    auto sol = solve_lp(build_elp(view, pref_with_q(world.reward_table()), world.budget));
    ASSERT_EQ(sol.status, LpStatus::optimal);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a) {
                double tot = 0.0;
                for (int sp = 0; sp < S; ++sp) tot += sol.x[omega_id(n, s, a, sp, S)];
                if (tot <= 1e-9) continue;
                double d = view.delta(n, s, a);
                for (int sp = 0; sp < S; ++sp) {
                    double p = view.kernels[n].kernel(a)[s][sp];
                    double implied = sol.x[omega_id(n, s, a, sp, S)] / tot;
                    EXPECT_GE(implied, std::max(0.0, p - d) - 1e-7);
                    EXPECT_LE(implied, std::min(1.0, p + d) + 1e-7);
                }
            }
}

TEST(Indices, DirectIndexRatios) {
    EXPECT_DOUBLE_EQ(direct_index(0.2, 0.5), 0.4);
    EXPECT_DOUBLE_EQ(direct_index(0.0, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(direct_index(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(direct_index(1e-13, 1e-13), 0.0);
}

TEST(Indices, TablesFromMuAndOmegaAgree) {
    const int N = 1, S = 2;
    std::vector<double> mu(N * S * 2, 0.0);
    mu[mu_id(0, 0, 0, S)] = 0.3;
    mu[mu_id(0, 0, 1, S)] = 0.1;
    mu[mu_id(0, 1, 1, S)] = 0.6;
    std::vector<double> omega(N * S * 2 * S, 0.0);
    omega[omega_id(0, 0, 0, 0, S)] = 0.2;
    omega[omega_id(0, 0, 0, 1, S)] = 0.1;
    omega[omega_id(0, 0, 1, 1, S)] = 0.1;
    omega[omega_id(0, 1, 1, 0, S)] = 0.6;
    auto a = index_table_from_mu(mu, N, S);
    auto b = index_table_from_omega(omega, N, S);
    EXPECT_NEAR(a[0][0], 0.25, 1e-15);
    EXPECT_NEAR(b[0][0], 0.25, 1e-15);
    EXPECT_DOUBLE_EQ(a[0][1], 1.0);
    EXPECT_DOUBLE_EQ(b[0][1], 1.0);
    EXPECT_TRUE(a[0][0] >= 0.0 && a[0][0] <= 1.0);
}

TEST(Indices, SelectTopBTieBreaks) {
    std::vector<std::vector<double>> idx = {{0.9}, {0.1}, {0.5}, {0.5}};
    std::vector<int> states = {0, 0, 0, 0};
    EXPECT_EQ(select_top_b(idx, states, 2), (std::vector<int>{0, 2}));

    std::vector<std::vector<double>> flat = {{0.5}, {0.5}, {0.5}, {0.5}};
    EXPECT_EQ(select_top_b(flat, states, 3), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(select_top_b(flat, states, 4), (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(select_top_b(flat, states, 9), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Indices, PerStateLookupUsesCurrentStates) {
    std::vector<std::vector<double>> idx = {{0.1, 0.9}, {0.8, 0.2}};
    EXPECT_EQ(select_top_b(idx, {1, 1}, 1), (std::vector<int>{0}));
    EXPECT_EQ(select_top_b(idx, {0, 0}, 1), (std::vector<int>{1}));
}
