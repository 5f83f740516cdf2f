#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rng.hpp"
#include "transition.hpp"

namespace dopl {

// Range forced on any BT win probability by rewards in [0,1]
inline constexpr double kBtLow = 1.0 / (1.0 + 2.718281828459045235360287471352662498);
inline constexpr double kBtHigh = 2.718281828459045235360287471352662498 /
                                  (1.0 + 2.718281828459045235360287471352662498);
inline constexpr double kLipschitz = 1.3;

inline double clamp_bt(double f) { return std::min(kBtHigh, std::max(kBtLow, f)); }

// ln(f/(1-f)) on the clamped range, mapping [1/(1+e), e/(1+e)] onto [-1,1].
// Input outside the range (beyond fp slack) means a missing clamp upstream.
inline double q_value(double f) {
    if (f < kBtLow - 1e-12 || f > kBtHigh + 1e-12)
        throw std::domain_error("q_value: input outside the BT range; clamp missing");
    double q = std::log(f / (1.0 - f));
    return std::min(1.0, std::max(-1.0, q));
}

// duel[i][j] bookkeeping over global (arm,state) indices, upper triangle
// only: the lower triangle is determined by complementarity.
class ComparisonLedger {
public:
    ComparisonLedger() = default;
    ComparisonLedger(int n_arms, int n_states)
        : n_arms_(n_arms),
          n_states_(n_states),
          dim_(n_arms * n_states),
          count_(static_cast<size_t>(dim_) * dim_, 0),
          wins_(static_cast<size_t>(dim_) * dim_, 0) {}

    int n_arms() const { return n_arms_; }
    int n_states() const { return n_states_; }
    int dim() const { return dim_; }

    // i, j are global indices; i_won refers to i. Stored canonically under
    // the smaller index with the win flipped if needed.
    void record_duel(int i, int j, int i_won) {
        if (i == j) throw std::invalid_argument("record_duel: self-duel");
        check(i);
        check(j);
        int lo = std::min(i, j), hi = std::max(i, j);
        count_[cell(lo, hi)] += 1;
        wins_[cell(lo, hi)] += (i < j) ? i_won : 1 - i_won;
    }

    int64_t count(int i, int j) const {
        check(i);
        check(j);
        if (i == j) return 0;
        return count_[cell(std::min(i, j), std::max(i, j))];
    }

    // wins of i over j regardless of storage orientation
    int64_t wins(int i, int j) const {
        check(i);
        check(j);
        if (i == j) return 0;
        int lo = std::min(i, j), hi = std::max(i, j);
        int64_t w = wins_[cell(lo, hi)];
        return (i == lo) ? w : count_[cell(lo, hi)] - w;
    }

    int64_t total_count() const {
        int64_t t = 0;
        for (auto c : count_) t += c;
        return t;
    }

    const std::vector<int64_t>& raw_counts() const { return count_; }
    const std::vector<int64_t>& raw_wins() const { return wins_; }
    void load(std::vector<int64_t> counts, std::vector<int64_t> wins) {
        if (counts.size() != count_.size() || wins.size() != wins_.size())
            throw std::invalid_argument("ComparisonLedger::load: shape mismatch");
        count_ = std::move(counts);
        wins_ = std::move(wins);
    }

private:
    size_t cell(int lo, int hi) const { return static_cast<size_t>(lo) * dim_ + hi; }
    void check(int g) const {
        if (g < 0 || g >= dim_) throw std::out_of_range("ledger: bad global index");
    }

    int n_arms_ = 0;
    int n_states_ = 0;
    int dim_ = 0;
    std::vector<int64_t> count_;
    std::vector<int64_t> wins_;
};

// B-1 duels per step: a star around a pivot drawn uniformly from the active
// set. Pairs are (pivot, other) positions into the active set.
inline std::vector<std::pair<int, int>> schedule_duels(Rng& rng, int n_active) {
    std::vector<std::pair<int, int>> pairs;
    if (n_active < 2) return pairs;
    int pivot = static_cast<int>(rng.uniform_int(n_active));
    pairs.reserve(n_active - 1);
    for (int o = 0; o < n_active; ++o)
        if (o != pivot) pairs.emplace_back(pivot, o);
    return pairs;
}

// (W/C, width); no data falls back to the 0.5 prior with width 1
inline std::pair<double, double> empirical_preference(const ComparisonLedger& ledger, int i,
                                                      int j, double log_term) {
    int64_t c = ledger.count(i, j);
    if (c == 0) return {0.5, 1.0};
    double f = static_cast<double>(ledger.wins(i, j)) / static_cast<double>(c);
    return {f, confidence_width(c, log_term)};
}

inline std::pair<double, double> empirical_preference(const ComparisonLedger& ledger, int i, int j,
                                                      int k, int H, int N, int S_card, int A_card,
                                                      double eps) {
    return empirical_preference(ledger, i, j, width_log_term(k, H, N, S_card, A_card, eps));
}

// Transitivity of the BT model: F(j1,j2) from F(j,j1) and F(j,j2).
inline std::pair<double, double> infer_preference(double f_j_j1, double f_j_j2, double d1,
                                                  double d2) {
    if (f_j_j1 <= 0.0 || f_j_j1 >= 1.0 || f_j_j2 <= 0.0 || f_j_j2 >= 1.0)
        throw std::domain_error("infer_preference: input at 0/1; upstream clamp missing");
    double num = (1.0 - f_j_j1) * f_j_j2;
    double den = num + (1.0 - f_j_j2) * f_j_j1;
    return {num / den, kLipschitz * (d1 + d2)};
}

struct PreferenceEstimate {
    int n_arms = 0;
    int n_states = 0;
    std::vector<std::vector<double>> f_hat;    // best estimate vs reference, BT-clamped
    std::vector<std::vector<double>> f_tilde;  // after bonus + clamp
    std::vector<std::vector<double>> width;    // min(direct, inferred)
    std::vector<std::vector<double>> q_tilde;
};

// Estimate the reference column: direct W/C where available, single-pivot
// inference where it is tighter, optimism bonus, clamp, Q̃.
inline PreferenceEstimate build_reference_column(const ComparisonLedger& ledger, int ref_arm,
                                                 int ref_state, int k, int H, double eps) {
    const int N = ledger.n_arms(), S = ledger.n_states();
    const int g_star = global_index(ref_arm, ref_state, S);
    const double log_term = width_log_term(k, H, N, S, 2, eps);

    PreferenceEstimate est;
    est.n_arms = N;
    est.n_states = S;
    est.f_hat.assign(N, std::vector<double>(S, 0.5));
    est.f_tilde.assign(N, std::vector<double>(S, 0.5));
    est.width.assign(N, std::vector<double>(S, 0.0));
    est.q_tilde.assign(N, std::vector<double>(S, 0.0));

    for (int n = 0; n < N; ++n) {
        for (int s = 0; s < S; ++s) {
            int g = global_index(n, s, S);
            if (g == g_star) continue;  // known by definition: 0.5, width 0, q 0

            auto [f_dir_raw, d_dir] = empirical_preference(ledger, g, g_star, log_term);
            double f_best = clamp_bt(f_dir_raw);
            double d_best = d_dir;

            // pivot: the row with the tightest direct estimate against the
            // reference, among rows that have dueled (n,s); ties -> smaller
            // global index
            int best_j = -1;
            double best_ref_width = 2.0;
            for (int j = 0; j < ledger.dim(); ++j) {
                if (j == g || j == g_star) continue;
                if (ledger.count(j, g) == 0) continue;
                double d_ref = confidence_width(ledger.count(j, g_star), log_term);
                if (d_ref < best_ref_width) {
                    best_ref_width = d_ref;
                    best_j = j;
                }
            }
            if (best_j >= 0) {
                auto [x_raw, d1] = empirical_preference(ledger, best_j, g, log_term);
                auto [y_raw, d2] = empirical_preference(ledger, best_j, g_star, log_term);
                auto [f_inf, d_inf] = infer_preference(clamp_bt(x_raw), clamp_bt(y_raw), d1, d2);
                if (d_inf < d_best) {
                    d_best = d_inf;
                    f_best = clamp_bt(f_inf);
                }
            }

            est.f_hat[n][s] = f_best;
            est.width[n][s] = d_best;
            est.f_tilde[n][s] = clamp_bt(f_best + d_best);
            est.q_tilde[n][s] = q_value(est.f_tilde[n][s]);
        }
    }
    return est;
}

}  // namespace dopl
