#include <gtest/gtest.h>

#include <sstream>

#include "dopl/lp.hpp"
#include "dopl/rng.hpp"

using namespace dopl;

namespace {
LinearProgram::Row row(std::vector<double> a, double rhs) { return {std::move(a), rhs}; }
}  // namespace

TEST(Simplex, OneVariableBound) {
    LinearProgram lp;
    lp.n_vars = 1;
    lp.objective = {1.0};
    lp.ub.push_back(row({1.0}, 0.3));
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.x[0], 0.3, 1e-9);
    EXPECT_NEAR(sol.objective_value, 0.3, 1e-9);
}

TEST(Simplex, TextbookTwoVariable) {
    // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> optimum 36 at (2,6)
    LinearProgram lp;
    lp.n_vars = 2;
    lp.objective = {3.0, 5.0};
    lp.ub.push_back(row({1, 0}, 4));
    lp.ub.push_back(row({0, 2}, 12));
    lp.ub.push_back(row({3, 2}, 18));
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 36.0, 1e-9);
    EXPECT_NEAR(sol.x[0], 2.0, 1e-9);
    EXPECT_NEAR(sol.x[1], 6.0, 1e-9);
}

TEST(Simplex, EqualityConstraints) {
    // max x + 2y st x + y = 1 -> (0,1), objective 2
    LinearProgram lp;
    lp.n_vars = 2;
    lp.objective = {1.0, 2.0};
    lp.eq.push_back(row({1, 1}, 1));
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 2.0, 1e-9);
    EXPECT_NEAR(sol.x[1], 1.0, 1e-9);
}

TEST(Simplex, NegativeRhsRows) {
    // x >= 0.4 written as -x <= -0.4; min x under max of -x
    LinearProgram lp;
    lp.n_vars = 1;
    lp.objective = {-1.0};
    lp.ub.push_back(row({-1.0}, -0.4));
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.x[0], 0.4, 1e-9);
}

TEST(Simplex, InfeasibleDetected) {
    LinearProgram lp;
    lp.n_vars = 1;
    lp.objective = {1.0};
    lp.ub.push_back(row({1.0}, 0.3));
    lp.ub.push_back(row({-1.0}, -0.5));  // x >= 0.5 contradicts x <= 0.3
    auto sol = solve_lp(lp);
    EXPECT_EQ(sol.status, LpStatus::infeasible);
}

TEST(Simplex, UnboundedReportedAsFailure) {
    LinearProgram lp;
    lp.n_vars = 1;
    lp.objective = {1.0};
    auto sol = solve_lp(lp);
    EXPECT_EQ(sol.status, LpStatus::numerical_failure);
    EXPECT_FALSE(sol.message.empty());
}

TEST(Simplex, RedundantEqualityRows) {
    // duplicated constraint must not break phase 1
    LinearProgram lp;
    lp.n_vars = 2;
    lp.objective = {1.0, 1.0};
    lp.eq.push_back(row({1, 1}, 1));
    lp.eq.push_back(row({1, 1}, 1));
    lp.eq.push_back(row({2, 2}, 2));
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 1.0, 1e-9);
}

TEST(Simplex, DegenerateTieResolvesToLowIndex) {
    // every variable gives the same objective; the refined vertex must put
    // mass on the lowest-index variable, deterministically
    LinearProgram lp;
    lp.n_vars = 4;
    lp.objective = {1.0, 1.0, 1.0, 1.0};
    lp.eq.push_back(row({1, 1, 1, 1}, 1));
    auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.x[0], 1.0, 1e-9);
    for (int rep = 0; rep < 5; ++rep) {
        auto again = solve_lp(lp);
        EXPECT_EQ(again.x, sol.x);
    }
}

TEST(Simplex, CustomRefineBiasPicksItsVertex) {
    // same flat objective as above, but the caller-supplied bias prefers the
    // last variable, so the refined vertex moves there
    LinearProgram lp;
    lp.n_vars = 4;
    lp.objective = {1.0, 1.0, 1.0, 1.0};
    lp.eq.push_back(row({1, 1, 1, 1}, 1));
    LpOptions opt;
    opt.refine_bias = {0.0, 0.0, 0.0, 1.0};
    auto sol = solve_lp(lp, opt);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.x[3], 1.0, 1e-9);
    EXPECT_NEAR(sol.objective_value, 1.0, 1e-9);
}

TEST(Simplex, BiasCannotLeaveTheOptimalFace) {
    // variable 2 carries a worse objective; no bias weight may drag mass
    // onto it at the expense of the true optimum
    LinearProgram lp;
    lp.n_vars = 3;
    lp.objective = {1.0, 1.0, 0.5};
    lp.eq.push_back(row({1, 1, 1}, 1));
    LpOptions opt;
    opt.refine_bias = {0.0, 0.0, 100.0};
    auto sol = solve_lp(lp, opt);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 1.0, 1e-9);
    EXPECT_NEAR(sol.x[2], 0.0, 1e-9);
}

TEST(Simplex, RefinementKeepsTrueObjective) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        LinearProgram lp;
        lp.n_vars = 6;
        for (int j = 0; j < 6; ++j) lp.objective.push_back(rng.uniform01());
        std::vector<double> ones(6, 1.0);
        lp.eq.push_back(row(ones, 1));
        // draw a simplex point first and keep every cap above its row value
        // there, so the program is feasible by construction
        std::vector<double> xbar(6);
        double tot = 0;
        for (auto& v : xbar) {
            v = 0.05 + rng.uniform01();
            tot += v;
        }
        for (auto& v : xbar) v /= tot;
        for (int r = 0; r < 3; ++r) {
            std::vector<double> a(6);
            double at = 0;
            for (int j = 0; j < 6; ++j) {
                a[j] = rng.uniform01();
                at += a[j] * xbar[j];
            }
            lp.ub.push_back(row(std::move(a), at + 0.02 + 0.3 * rng.uniform01()));
        }
        LpOptions raw;
        raw.refine_vertex = false;
        auto plain = solve_lp(lp, raw);
        auto refined = solve_lp(lp);
        ASSERT_EQ(plain.status, LpStatus::optimal);
        ASSERT_EQ(refined.status, LpStatus::optimal);
        EXPECT_NEAR(refined.objective_value, plain.objective_value, 1e-7);
    }
}

TEST(Simplex, SolutionIsPrimalFeasible) {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        LinearProgram lp;
        lp.n_vars = 5;
        for (int j = 0; j < 5; ++j) lp.objective.push_back(rng.uniform01() - 0.3);
        std::vector<double> ones(5, 1.0);
        lp.eq.push_back(row(ones, 1));
        std::vector<double> xbar(5);
        double tot = 0;
        for (auto& v : xbar) {
            v = 0.05 + rng.uniform01();
            tot += v;
        }
        for (auto& v : xbar) v /= tot;
        std::vector<double> b(5);
        double at = 0;
        for (int j = 0; j < 5; ++j) {
            b[j] = rng.uniform01();
            at += b[j] * xbar[j];
        }
        double cap = at + 0.02 + 0.3 * rng.uniform01();
        lp.ub.push_back(row(b, cap));
        auto sol = solve_lp(lp);
        ASSERT_EQ(sol.status, LpStatus::optimal);
        double sum = 0, dot = 0;
        for (int j = 0; j < 5; ++j) {
            EXPECT_GE(sol.x[j], -1e-9);
            sum += sol.x[j];
            dot += lp.ub[0].a[j] * sol.x[j];
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
        EXPECT_LE(dot, cap + 1e-6);
    }
}

TEST(Simplex, IterationLimitReported) {
    LinearProgram lp;
    lp.n_vars = 2;
    lp.objective = {3.0, 5.0};
    lp.ub.push_back(row({1, 0}, 4));
    lp.ub.push_back(row({0, 2}, 12));
    lp.ub.push_back(row({3, 2}, 18));
    LpOptions opt;
    opt.max_iters = 1;
    auto sol = solve_lp(lp, opt);
    EXPECT_EQ(sol.status, LpStatus::numerical_failure);
    EXPECT_NE(sol.message.find("iteration"), std::string::npos);
}

TEST(DumpLp, TextualFormRoundTripsTheShape) {
    LinearProgram lp;
    lp.n_vars = 2;
    lp.objective = {1.0, -2.5};
    lp.ub.push_back(row({1, 1}, 3));
    lp.eq.push_back(row({0, 1}, 1));
    std::ostringstream os;
    dump_lp(lp, os);
    std::string text = os.str();
    EXPECT_NE(text.find("Maximize"), std::string::npos);
    EXPECT_NE(text.find("Subject To"), std::string::npos);
    EXPECT_NE(text.find("<= 3"), std::string::npos);
    EXPECT_NE(text.find("= 1"), std::string::npos);
    EXPECT_NE(text.find("x1"), std::string::npos);
    EXPECT_NE(text.find("End"), std::string::npos);
}
