#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "world.hpp"

namespace dopl {

// ln(4 |S| |A| N max{(k-1)H, 1} / eps) — shared by the transition and
// preference widths. The max guard keeps episode 1 finite.
inline double width_log_term(int k, int H, int N, int S_card, int A_card, double eps) {
    if (k < 1) throw std::invalid_argument("episode index starts at 1");
    double steps = std::max(static_cast<double>(k - 1) * H, 1.0);
    return std::log(4.0 * S_card * A_card * N * steps / eps);
}

// Hoeffding width, clamped at 1 (deviations above 1 say nothing about
// probabilities).
inline double confidence_width(int64_t count, int k, int H, int N, int S_card, int A_card,
                               double eps) {
    double lt = width_log_term(k, H, N, S_card, A_card, eps);
    double denom = std::max(2.0 * static_cast<double>(count), 1.0);
    return std::min(1.0, std::sqrt(lt / denom));
}

inline double confidence_width(int64_t count, double log_term) {
    double denom = std::max(2.0 * static_cast<double>(count), 1.0);
    return std::min(1.0, std::sqrt(log_term / denom));
}

// Visit counts and empirical kernels per arm. Kernels and widths are pure
// functions of the counts, recomputed on demand.
class TransitionEstimate {
public:
    TransitionEstimate() = default;
    TransitionEstimate(int n_arms, int n_states)
        : n_arms_(n_arms),
          n_states_(n_states),
          visits_(static_cast<size_t>(n_arms) * n_states * 2, 0),
          transitions_(static_cast<size_t>(n_arms) * n_states * 2 * n_states, 0) {}

    int n_arms() const { return n_arms_; }
    int n_states() const { return n_states_; }

    void record_transition(int n, int s, int a, int s_next) {
        check_ids(n, s, a, s_next);
        visits_[vid(n, s, a)] += 1;
        transitions_[tid(n, s, a, s_next)] += 1;
    }

    int64_t visits(int n, int s, int a) const { return visits_[vid(n, s, a)]; }
    int64_t transitions(int n, int s, int a, int s_next) const {
        return transitions_[tid(n, s, a, s_next)];
    }

    // P̂(s'|s,a) row; unvisited pairs fall back to the uniform prior
    std::vector<double> kernel_row(int n, int s, int a) const {
        int64_t z = visits_[vid(n, s, a)];
        std::vector<double> row(n_states_);
        if (z == 0) {
            for (auto& v : row) v = 1.0 / n_states_;
            return row;
        }
        for (int sp = 0; sp < n_states_; ++sp)
            row[sp] = static_cast<double>(transitions_[tid(n, s, a, sp)]) / static_cast<double>(z);
        return row;
    }

    ArmDynamics empirical_kernel(int n) const {
        ArmDynamics d;
        d.passive.resize(n_states_);
        d.active.resize(n_states_);
        for (int s = 0; s < n_states_; ++s) {
            d.passive[s] = kernel_row(n, s, 0);
            d.active[s] = kernel_row(n, s, 1);
        }
        return d;
    }

    double width(int n, int s, int a, int k, int H, double eps) const {
        return confidence_width(visits_[vid(n, s, a)], k, H, n_arms_, n_states_, 2, eps);
    }

    bool in_confidence_set(int n, const ArmDynamics& candidate, int k, int H, double eps) const {
        if (static_cast<int>(candidate.passive.size()) != n_states_ ||
            static_cast<int>(candidate.active.size()) != n_states_)
            throw std::invalid_argument("in_confidence_set: candidate shape mismatch");
        for (int s = 0; s < n_states_; ++s)
            for (int a = 0; a < 2; ++a) {
                const auto& cand_row = candidate.kernel(a)[s];
                if (static_cast<int>(cand_row.size()) != n_states_)
                    throw std::invalid_argument("in_confidence_set: candidate shape mismatch");
                auto est_row = kernel_row(n, s, a);
                double delta = width(n, s, a, k, H, eps);
                for (int sp = 0; sp < n_states_; ++sp)
                    if (std::abs(cand_row[sp] - est_row[sp]) > delta) return false;
            }
        return true;
    }

    const std::vector<int64_t>& raw_visits() const { return visits_; }
    const std::vector<int64_t>& raw_transitions() const { return transitions_; }
    void load_counts(std::vector<int64_t> visits, std::vector<int64_t> transitions) {
        if (visits.size() != visits_.size() || transitions.size() != transitions_.size())
            throw std::invalid_argument("load_counts: shape mismatch");
        visits_ = std::move(visits);
        transitions_ = std::move(transitions);
    }

private:
    size_t vid(int n, int s, int a) const {
        return (static_cast<size_t>(n) * n_states_ + s) * 2 + a;
    }
    size_t tid(int n, int s, int a, int sp) const { return vid(n, s, a) * n_states_ + sp; }
    void check_ids(int n, int s, int a, int sp) const {
        if (n < 0 || n >= n_arms_ || s < 0 || s >= n_states_ || (a != 0 && a != 1) || sp < 0 ||
            sp >= n_states_)
            throw std::out_of_range("record_transition: invalid ids");
    }

    int n_arms_ = 0;
    int n_states_ = 0;
    std::vector<int64_t> visits_;
    std::vector<int64_t> transitions_;
};

// Materialized estimates for one planning pass: P̂ plus the episode-k widths.
struct TransitionView {
    std::vector<ArmDynamics> kernels;             // P̂ per arm
    std::vector<std::vector<double>> width;       // width[n][s*2+a]
    int n_states = 0;

    double delta(int n, int s, int a) const { return width[n][s * 2 + a]; }
};

inline TransitionView make_view(const TransitionEstimate& est, int k, int H, double eps) {
    TransitionView v;
    v.n_states = est.n_states();
    v.kernels.reserve(est.n_arms());
    v.width.assign(est.n_arms(), std::vector<double>(est.n_states() * 2, 0.0));
    for (int n = 0; n < est.n_arms(); ++n) {
        v.kernels.push_back(est.empirical_kernel(n));
        for (int s = 0; s < est.n_states(); ++s)
            for (int a = 0; a < 2; ++a) v.width[n][s * 2 + a] = est.width(n, s, a, k, H, eps);
    }
    return v;
}

}  // namespace dopl
