#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dopl/lp.hpp"
#include "dopl/planner.hpp"
#include "dopl/preference.hpp"
#include "dopl/rng.hpp"
#include "dopl/transition.hpp"

namespace dopl {

// Policies see only their own feedback (duel outcomes, transitions of arms
// they know by id) and shape/budget constants. Nothing model-typed crosses
// this boundary; the harness keeps the ground truth.

class Policy {
public:
    virtual ~Policy() = default;
    virtual void begin_episode(int episode, Rng& rng) = 0;
    virtual std::vector<int> activate(const std::vector<int>& states, Rng& rng) = 0;
    [[nodiscard]] virtual bool wants_duels() const { return false; }
    virtual void observe_duel(int gi, int gj, bool i_won) {
        (void)gi;
        (void)gj;
        (void)i_won;
    }
    virtual void observe_transition(int n, int s, int a, int s_next) {
        (void)n;
        (void)s;
        (void)a;
        (void)s_next;
    }
    // diagnostics hooks; null when a policy has no such estimate
    [[nodiscard]] virtual const std::vector<std::vector<double>>* index_table() const {
        return nullptr;
    }
    [[nodiscard]] virtual const PreferenceEstimate* preference() const { return nullptr; }
    [[nodiscard]] virtual const TransitionEstimate* transitions() const { return nullptr; }
};

// ---------------------------------------------------------------------------
// Oracle: fixed index table computed offline from the exact LP on the truth.
// ---------------------------------------------------------------------------

class OraclePolicy : public Policy {
public:
    OraclePolicy(std::vector<std::vector<double>> index, int budget)
        : index_(std::move(index)), budget_(budget) {}
    void begin_episode(int, Rng&) override {}
    std::vector<int> activate(const std::vector<int>& states, Rng&) override {
        return select_top_b(index_, states, budget_);
    }
    [[nodiscard]] const std::vector<std::vector<double>>* index_table() const override {
        return &index_;
    }

private:
    std::vector<std::vector<double>> index_;
    int budget_;
};

// ---------------------------------------------------------------------------
// Uniformly random subset of the budget size, no learning, no duels.
// ---------------------------------------------------------------------------

class RandomPolicy : public Policy {
public:
    RandomPolicy(int n_arms, int budget) : n_arms_(n_arms), budget_(budget) {}
    void begin_episode(int, Rng&) override {}
    std::vector<int> activate(const std::vector<int>&, Rng& rng) override {
        std::vector<int> ids(n_arms_);
        std::iota(ids.begin(), ids.end(), 0);
        for (int i = 0; i < budget_ && i < n_arms_; ++i) {
            int j = i + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_arms_ - i)));
            std::swap(ids[i], ids[j]);
        }
        ids.resize(std::min(budget_, n_arms_));
        std::sort(ids.begin(), ids.end());
        return ids;
    }

private:
    int n_arms_;
    int budget_;
};

// ---------------------------------------------------------------------------
// The preference-feedback learner: confidence sets on transitions, a
// reference preference column inferred from duels, an occupancy LP with the
// confidence ball folded in, and the direct activation index from its
// solution. Replans once per episode from data gathered so far.
// ---------------------------------------------------------------------------

class DoplPolicy : public Policy {
public:
    DoplPolicy(int n_arms, int n_states, int budget, int horizon, double epsilon,
               int reference_arm, int reference_state)
        : n_arms_(n_arms),
          n_states_(n_states),
          budget_(budget),
          horizon_(horizon),
          epsilon_(epsilon),
          ref_arm_(reference_arm),
          ref_state_(reference_state),
          ledger_(n_arms, n_states),
          est_(n_arms, n_states),
          index_(n_arms, std::vector<double>(n_states, 0.0)) {}

    void begin_episode(int episode, Rng&) override {
        pref_ = build_reference_column(ledger_, ref_arm_, ref_state_, episode, horizon_, epsilon_);
        auto view = make_view(est_, episode, horizon_, epsilon_);
        auto lp = build_elp(view, pref_, budget_);
        lp_options_.refine_bias = elp_activation_bias(n_arms_, n_states_, budget_, episode);
        auto sol = solve_lp(lp, lp_options_);
        if (sol.status == LpStatus::optimal) {
            index_ = index_table_from_omega(sol.x, n_arms_, n_states_);
        } else {
            ++lp_failures_;  // keep the previous plan
        }
    }
    std::vector<int> activate(const std::vector<int>& states, Rng&) override {
        return select_top_b(index_, states, budget_);
    }
    [[nodiscard]] bool wants_duels() const override { return true; }
    void observe_duel(int gi, int gj, bool i_won) override { ledger_.record_duel(gi, gj, i_won); }
    void observe_transition(int n, int s, int a, int s_next) override {
        est_.record_transition(n, s, a, s_next);
    }

    [[nodiscard]] const std::vector<std::vector<double>>* index_table() const override {
        return &index_;
    }
    [[nodiscard]] const PreferenceEstimate* preference() const override { return &pref_; }
    [[nodiscard]] const TransitionEstimate* transitions() const override { return &est_; }
    [[nodiscard]] const ComparisonLedger& ledger() const { return ledger_; }
    [[nodiscard]] int lp_failures() const { return lp_failures_; }

private:
    int n_arms_, n_states_, budget_, horizon_;
    double epsilon_;
    int ref_arm_, ref_state_;
    ComparisonLedger ledger_;
    TransitionEstimate est_;
    PreferenceEstimate pref_;
    std::vector<std::vector<double>> index_;
    LpOptions lp_options_;
    int lp_failures_ = 0;
};

// ---------------------------------------------------------------------------
// Maximum-likelihood baseline: fit per-cell rewards from the duel ledger
// under the comparison model, then plan with the exact LP on the point
// estimates of the kernels. Duels like the learner, optimism nowhere.
// ---------------------------------------------------------------------------

struct MleRewardFit {
    std::vector<double> r_hat;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double log_sigmoid(double z) {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

inline double mle_log_likelihood(const ComparisonLedger& ledger, const std::vector<double>& r,
                                 double reg) {
    const int dim = ledger.dim();
    double ll = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            double c = ledger.count(i, j);
            if (c == 0.0) continue;
            double w = ledger.wins(i, j);
            double d = r[i] - r[j];
            ll += w * log_sigmoid(d) + (c - w) * log_sigmoid(-d);
        }
    for (int i = 0; i < dim; ++i) ll -= 0.5 * reg * r[i] * r[i];
    return ll;
}

// Gradient with the reference entry pinned at zero.
inline std::vector<double> mle_gradient(const ComparisonLedger& ledger,
                                        const std::vector<double>& r, int ref, double reg) {
    const int dim = ledger.dim();
    std::vector<double> g(dim, 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            double c = ledger.count(i, j);
            if (c == 0.0) continue;
            double w = ledger.wins(i, j);
            double gi = w - c * sigmoid(r[i] - r[j]);
            g[i] += gi;
            g[j] -= gi;
        }
    for (int i = 0; i < dim; ++i) g[i] -= reg * r[i];
    if (ref >= 0) g[ref] = 0.0;
    return g;
}

inline MleRewardFit mle_fit_rewards(const ComparisonLedger& ledger, int ref, double reg = 1e-3,
                                    double tol = 1e-8, int max_iters = 500) {
    const int dim = ledger.dim();
    MleRewardFit fit;
    fit.r_hat.assign(dim, 0.0);
    double ll = mle_log_likelihood(ledger, fit.r_hat, reg);
    std::vector<double> r_prev, g_prev;
    for (int it = 0; it < max_iters; ++it) {
        auto g = mle_gradient(ledger, fit.r_hat, ref, reg);
        double gmax = 0.0, gnorm2 = 0.0;
        for (double v : g) {
            gmax = std::max(gmax, std::abs(v));
            gnorm2 += v * v;
        }
        fit.iterations = it;
        if (gmax < tol) {
            fit.converged = true;
            break;
        }
        // Barzilai-Borwein initial step; a fixed unit step crawls on lopsided
        // counts once the iterate overshoots into the flat tail of the logistic.
        double step = 1.0;
        if (!r_prev.empty()) {
            double num = 0.0, den = 0.0;
            for (int i = 0; i < dim; ++i) {
                double dr = fit.r_hat[i] - r_prev[i];
                num += dr * dr;
                den += dr * (g_prev[i] - g[i]);
            }
            if (den > 1e-16) step = std::clamp(num / den, 1e-8, 1e8);
        }
        r_prev = fit.r_hat;
        g_prev = g;
        bool moved = false;
        std::vector<double> cand(dim);
        while (step >= 1e-12) {
            for (int i = 0; i < dim; ++i) cand[i] = fit.r_hat[i] + step * g[i];
            if (ref >= 0) cand[ref] = 0.0;
            double cll = mle_log_likelihood(ledger, cand, reg);
            if (cll >= ll + 1e-4 * step * gnorm2) {
                fit.r_hat = cand;
                ll = cll;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    fit.log_likelihood = ll;
    return fit;
}

class MleLpPolicy : public Policy {
public:
    MleLpPolicy(int n_arms, int n_states, int budget, int reference_arm, int reference_state)
        : n_arms_(n_arms),
          n_states_(n_states),
          budget_(budget),
          ref_(global_index(reference_arm, reference_state, n_states)),
          ledger_(n_arms, n_states),
          est_(n_arms, n_states),
          index_(n_arms, std::vector<double>(n_states, 0.0)) {}

    void begin_episode(int, Rng&) override {
        fit_ = mle_fit_rewards(ledger_, ref_);
        std::vector<ArmDynamics> dyn(n_arms_);
        std::vector<std::vector<double>> values(n_arms_, std::vector<double>(n_states_));
        for (int n = 0; n < n_arms_; ++n) {
            dyn[n] = est_.empirical_kernel(n);
            for (int s = 0; s < n_states_; ++s)
                values[n][s] = fit_.r_hat[global_index(n, s, n_states_)];
        }
        auto lp = build_exact_lp(dyn, values, budget_);
        auto sol = solve_lp(lp, lp_options_);
        if (sol.status == LpStatus::optimal) {
            index_ = index_table_from_mu(sol.x, n_arms_, n_states_);
        } else {
            ++lp_failures_;
        }
    }
    std::vector<int> activate(const std::vector<int>& states, Rng&) override {
        return select_top_b(index_, states, budget_);
    }
    [[nodiscard]] bool wants_duels() const override { return true; }
    void observe_duel(int gi, int gj, bool i_won) override { ledger_.record_duel(gi, gj, i_won); }
    void observe_transition(int n, int s, int a, int s_next) override {
        est_.record_transition(n, s, a, s_next);
    }

    [[nodiscard]] const std::vector<std::vector<double>>* index_table() const override {
        return &index_;
    }
    [[nodiscard]] const TransitionEstimate* transitions() const override { return &est_; }
    [[nodiscard]] const MleRewardFit& fit() const { return fit_; }
    [[nodiscard]] int lp_failures() const { return lp_failures_; }

private:
    int n_arms_, n_states_, budget_, ref_;
    ComparisonLedger ledger_;
    TransitionEstimate est_;
    MleRewardFit fit_;
    std::vector<std::vector<double>> index_;
    LpOptions lp_options_;
    int lp_failures_ = 0;
};

}  // namespace dopl
