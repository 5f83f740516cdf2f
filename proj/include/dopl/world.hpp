#pragma once
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace dopl {

using Kernel = std::vector<std::vector<double>>;  // row-stochastic, kernel[s][s']

// One arm's controlled dynamics without the latent rewards. Planner-facing
// code sees this type; only the harness and the world touch rewards.
struct ArmDynamics {
    Kernel passive;
    Kernel active;

    const Kernel& kernel(int a) const { return a ? active : passive; }
};

struct ArmModel {
    int n_states = 0;
    Kernel kernel_passive;
    Kernel kernel_active;
    std::vector<double> rewards;

    void validate() const {
        auto check_kernel = [&](const Kernel& k, const char* name) {
            if (static_cast<int>(k.size()) != n_states)
                throw std::invalid_argument(std::string(name) + ": wrong row count");
            for (const auto& row : k) {
                if (static_cast<int>(row.size()) != n_states)
                    throw std::invalid_argument(std::string(name) + ": wrong column count");
                double sum = 0.0;
                for (double v : row) {
                    if (v < 0.0) throw std::invalid_argument(std::string(name) + ": negative entry");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw std::invalid_argument(std::string(name) + ": row does not sum to 1");
            }
        };
        check_kernel(kernel_passive, "kernel_passive");
        check_kernel(kernel_active, "kernel_active");
        if (static_cast<int>(rewards.size()) != n_states)
            throw std::invalid_argument("rewards: wrong length");
        for (double r : rewards)
            if (r < 0.0 || r > 1.0) throw std::invalid_argument("rewards: entry outside [0,1]");
    }

    const Kernel& kernel(int a) const { return a ? kernel_active : kernel_passive; }
    ArmDynamics dynamics() const { return {kernel_passive, kernel_active}; }
};

struct WorldModel {
    std::vector<ArmModel> arms;
    int budget = 0;
    std::vector<int> states;

    int size() const { return static_cast<int>(arms.size()); }
    int n_states() const { return arms.empty() ? 0 : arms[0].n_states; }

    void validate() const {
        if (arms.empty()) throw std::invalid_argument("world has no arms");
        for (const auto& a : arms) {
            a.validate();
            if (a.n_states != arms[0].n_states)
                throw std::invalid_argument("arms disagree on state count");
        }
        if (budget < 1 || budget > size())
            throw std::invalid_argument("budget outside [1, N]");
        if (states.size() != arms.size())
            throw std::invalid_argument("state vector length mismatch");
    }

    std::vector<ArmDynamics> dynamics() const {
        std::vector<ArmDynamics> d;
        d.reserve(arms.size());
        for (const auto& a : arms) d.push_back(a.dynamics());
        return d;
    }

    std::vector<std::vector<double>> reward_table() const {
        std::vector<std::vector<double>> r;
        r.reserve(arms.size());
        for (const auto& a : arms) r.push_back(a.rewards);
        return r;
    }
};

enum class RewardAccounting { all_arms, active_only };

struct ExperimentConfig {
    int n_episodes = 1;       // K
    int horizon = 1;          // H
    double epsilon = 1e-5;
    uint64_t seed = 0;
    int reference_arm = 0;
    int reference_state = 0;
    RewardAccounting reward_accounting = RewardAccounting::all_arms;
};

// (arm, state) -> row/column of the full preference matrix
inline int global_index(int arm, int state, int n_states) { return arm * n_states + state; }

namespace detail {
// p = exp(lo)/(exp(lo)+exp(hi)) for lo <= hi, so p <= 0.5
inline double bt_low_half(double lo, double hi) {
    double e_lo = std::exp(lo), e_hi = std::exp(hi);
    return e_lo / (e_lo + e_hi);
}
}  // namespace detail

// Bradley-Terry win probability of reward r_m over r_n. Computed on the
// ordered pair so that bt_preference(a,b) + bt_preference(b,a) == 1 holds
// bit-exactly: one direction is p <= 0.5, the other is evaluated as 1 - p,
// and p + fl(1-p) rounds back to 1 for p in the BT range.
inline double bt_preference(double r_m, double r_n) {
    if (r_m == r_n) return 0.5;
    if (r_m < r_n) return detail::bt_low_half(r_m, r_n);
    return 1.0 - detail::bt_low_half(r_n, r_m);
}

inline int sample_comparison(Rng& rng, double p) { return rng.bernoulli(p) ? 1 : 0; }

inline int step_arm(Rng& rng, const ArmModel& arm, int s, int a) {
    if (s < 0 || s >= arm.n_states) throw std::out_of_range("step_arm: invalid state id");
    if (a != 0 && a != 1) throw std::out_of_range("step_arm: invalid action");
    return rng.categorical(arm.kernel(a)[s]);
}

inline WorldModel build_app_marketing() {
    ArmModel arm;
    arm.n_states = 4;
    arm.kernel_passive = {{0.7, 0.1, 0.1, 0.1},
                          {0.5, 0.3, 0.1, 0.1},
                          {0.2, 0.4, 0.3, 0.1},
                          {0.1, 0.2, 0.2, 0.5}};
    arm.kernel_active = {{0.1, 0.1, 0.7, 0.1},
                         {0.1, 0.1, 0.1, 0.7},
                         {0.1, 0.1, 0.1, 0.7},
                         {0.05, 0.05, 0.05, 0.85}};
    arm.rewards = {0.0, 0.33, 0.66, 1.0};
    WorldModel w;
    w.arms.assign(10, arm);
    w.budget = 4;
    w.states.assign(10, 0);
    w.validate();
    return w;
}

// Two patient clusters. High-risk patients come first so that the default
// reference cell (arm 0, state 0) belongs to an arm the planner keeps
// intervening on; its preference column then actually receives duels.
inline WorldModel build_cpap(int n_general = 10, int n_high_risk = 10) {
    ArmModel general;
    general.n_states = 3;
    general.kernel_passive = {{0.1385, 0.1, 0.7615},
                              {0.1, 0.1, 0.8},
                              {0.1257, 0.1245, 0.7498}};
    general.kernel_active = {{0.1, 0.1, 0.8},
                             {0.1, 0.1, 0.8},
                             {0.1, 0.1, 0.8}};
    general.rewards = {0.0, 0.5, 1.0};

    ArmModel high_risk;
    high_risk.n_states = 3;
    high_risk.kernel_passive = {{0.7427, 0.0741, 0.1832},
                                {0.3399, 0.1634, 0.4967},
                                {0.2323, 0.1020, 0.6657}};
    high_risk.kernel_active = {{0.1427, 0.3741, 0.4832},
                               {0.1399, 0.1, 0.7601},
                               {0.1323, 0.1, 0.7677}};
    high_risk.rewards = {0.0, 0.5, 1.0};

    WorldModel w;
    w.arms.reserve(n_general + n_high_risk);
    for (int i = 0; i < n_high_risk; ++i) w.arms.push_back(high_risk);
    for (int i = 0; i < n_general; ++i) w.arms.push_back(general);
    w.budget = 8;
    w.states.assign(w.arms.size(), 0);
    w.validate();
    return w;
}

namespace detail {

struct RangedCell {
    double lo, hi;
    bool fixed() const { return lo == hi; }
};

// Rows mix fixed cells with ranged ones. Every ranged cell except the last
// is sampled uniformly; the last ranged cell takes the residual so the row
// sums to exactly 1, and the draw is rejected if the residual leaves its
// printed range.
inline std::vector<double> sample_row(Rng& rng, const std::vector<RangedCell>& row,
                                      int max_retries) {
    int last_ranged = -1;
    for (int i = 0; i < static_cast<int>(row.size()); ++i)
        if (!row[i].fixed()) last_ranged = i;
    if (last_ranged < 0) {
        std::vector<double> out;
        for (const auto& c : row) out.push_back(c.lo);
        return out;
    }
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        std::vector<double> out(row.size());
        double partial = 0.0;
        for (int i = 0; i < static_cast<int>(row.size()); ++i) {
            if (i == last_ranged) continue;
            out[i] = row[i].fixed() ? row[i].lo
                                    : row[i].lo + (row[i].hi - row[i].lo) * rng.uniform01();
            partial += out[i];
        }
        double residual = 1.0 - partial;
        if (residual >= row[last_ranged].lo - 1e-12 && residual <= row[last_ranged].hi + 1e-12) {
            out[last_ranged] = residual;
            return out;
        }
    }
    throw std::runtime_error("build_armman: row sampling failed; ranges admit no valid row");
}

inline Kernel sample_kernel(Rng& rng, const std::vector<std::vector<RangedCell>>& spec_rows,
                            int max_retries) {
    Kernel k;
    for (const auto& row : spec_rows) k.push_back(sample_row(rng, row, max_retries));
    return k;
}

}  // namespace detail

inline WorldModel build_armman(Rng& rng, int max_retries = 10000) {
    using detail::RangedCell;
    using Rows = std::vector<std::vector<RangedCell>>;
    auto F = [](double v) { return RangedCell{v, v}; };
    auto R = [](double lo, double hi) { return RangedCell{lo, hi}; };

    const Rows a_passive = {{R(0.5, 0.95), R(0.0, 0.90), F(0.05)},
                            {F(0.05), R(0.0, 0.5), R(0.45, 0.95)},
                            {F(0.05), R(0.1, 0.6), R(0.35, 0.85)}};
    const Rows a_active = {{R(0.5, 0.95), R(0.0, 0.90), F(0.05)},
                           {R(0.45, 0.95), R(0.0, 0.5), F(0.05)},
                           {F(0.05), R(0.1, 0.6), R(0.35, 0.85)}};
    const Rows b_passive = {{R(0.5, 0.95), R(0.0, 0.90), F(0.05)},
                            {F(0.05), R(0.1, 0.6), R(0.35, 0.85)},
                            {F(0.05), R(0.1, 0.6), R(0.35, 0.85)}};
    const Rows b_active = {{R(0.5, 0.95), R(0.0, 0.90), F(0.05)},
                           {R(0.15, 0.65), R(0.3, 0.8), F(0.05)},
                           {F(0.05), R(0.1, 0.6), R(0.35, 0.85)}};
    const Rows c_passive = b_passive;
    const Rows c_active = {{R(0.5, 0.95), R(0.0, 0.90), F(0.05)},
                           {R(0.05, 0.50), R(0.45, 0.90), F(0.05)},
                           {F(0.05), R(0.1, 0.6), R(0.35, 0.85)}};

    auto make_arm = [&](const Rows& passive, const Rows& active) {
        ArmModel arm;
        arm.n_states = 3;
        arm.kernel_passive = detail::sample_kernel(rng, passive, max_retries);
        arm.kernel_active = detail::sample_kernel(rng, active, max_retries);
        arm.rewards = {1.0, 0.5, 0.0};
        return arm;
    };

    WorldModel w;
    for (int i = 0; i < 4; ++i) w.arms.push_back(make_arm(a_passive, a_active));
    for (int i = 0; i < 4; ++i) w.arms.push_back(make_arm(b_passive, b_active));
    for (int i = 0; i < 12; ++i) w.arms.push_back(make_arm(c_passive, c_active));
    w.budget = 10;
    w.states.assign(w.arms.size(), 0);
    w.validate();
    return w;
}

}  // namespace dopl
