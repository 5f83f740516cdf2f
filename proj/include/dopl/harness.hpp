#pragma once
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dopl/planner.hpp"
#include "dopl/policies.hpp"
#include "dopl/serialize.hpp"
#include "dopl/world.hpp"

namespace dopl {

enum class PolicyKind { dopl, oracle, random, mle_lp };
enum class EnvKind { app_marketing, cpap, armman, custom };

inline const char* to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::dopl: return "dopl";
        case PolicyKind::oracle: return "oracle";
        case PolicyKind::random: return "random";
        case PolicyKind::mle_lp: return "mle_lp";
    }
    return "?";
}
inline const char* to_string(EnvKind e) {
    switch (e) {
        case EnvKind::app_marketing: return "app_marketing";
        case EnvKind::cpap: return "cpap";
        case EnvKind::armman: return "armman";
        case EnvKind::custom: return "custom";
    }
    return "?";
}

struct Preset {
    int n_episodes = 0;
    int horizon = 0;
    double epsilon = 1e-5;
};

// Paper-scale runs, and desk-scale (quarter episode count) for quick checks.
inline Preset preset_for(EnvKind env, bool desk) {
    Preset p;
    switch (env) {
        case EnvKind::app_marketing: p = {4000, 100, 1e-5}; break;
        case EnvKind::cpap: p = {300, 1000, 1e-5}; break;
        case EnvKind::armman: p = {20000, 5, 1e-5}; break;
        case EnvKind::custom: p = {100, 100, 1e-5}; break;
    }
    if (desk) p.n_episodes = std::max(1, p.n_episodes / 4);
    return p;
}

struct EpisodeLog {
    int episode = 0;  // 1-based
    double episodic_reward = 0.0;
    std::vector<int64_t> activations;  // per arm
    int64_t duels = 0;
    int64_t transitions = 0;
    double index_error = std::numeric_limits<double>::quiet_NaN();
    double f_error = std::numeric_limits<double>::quiet_NaN();
    double p_error = std::numeric_limits<double>::quiet_NaN();
    double r_error = std::numeric_limits<double>::quiet_NaN();
};

struct RegretReport {
    double j_star = 0.0;
    std::vector<double> per_episode;
    std::vector<double> cumulative;
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool slope_defined = false;
};

struct RunResult {
    std::vector<EpisodeLog> logs;
    double j_star = 0.0;
    std::vector<std::vector<double>> oracle_index;
    int lp_failures = 0;
    double wall_seconds = 0.0;
};

inline std::unique_ptr<Policy> make_policy(PolicyKind kind, const WorldModel& world,
                                           const ExperimentConfig& cfg,
                                           const std::vector<std::vector<double>>& oracle_index) {
    const int N = world.size(), S = world.n_states(), B = world.budget;
    switch (kind) {
        case PolicyKind::oracle:
            return std::make_unique<OraclePolicy>(oracle_index, B);
        case PolicyKind::random:
            return std::make_unique<RandomPolicy>(N, B);
        case PolicyKind::dopl:
            return std::make_unique<DoplPolicy>(N, S, B, cfg.horizon, cfg.epsilon,
                                                cfg.reference_arm, cfg.reference_state);
        case PolicyKind::mle_lp:
            return std::make_unique<MleLpPolicy>(N, S, B, cfg.reference_arm, cfg.reference_state);
    }
    throw std::invalid_argument("unknown policy");
}

namespace detail {

// Ground truth the harness keeps to itself: the oracle index table and the
// reference-anchored preference column, used only for logging.
struct OracleQuantities {
    std::vector<std::vector<double>> index;
    std::vector<double> f_true;  // BT win probability vs the reference cell
    std::vector<double> q_true;  // log-odds vs the reference cell
};

inline OracleQuantities oracle_quantities(const WorldModel& world, const ExperimentConfig& cfg,
                                          const std::vector<std::vector<double>>& oracle_index) {
    const int N = world.size(), S = world.n_states();
    OracleQuantities oq;
    oq.index = oracle_index;
    double r_ref = world.arms[cfg.reference_arm].rewards[cfg.reference_state];
    oq.f_true.resize(static_cast<size_t>(N) * S);
    oq.q_true.resize(static_cast<size_t>(N) * S);
    for (int n = 0; n < N; ++n)
        for (int s = 0; s < S; ++s) {
            int g = global_index(n, s, S);
            double r = world.arms[n].rewards[s];
            oq.f_true[g] = bt_preference(r, r_ref);
            oq.q_true[g] = r - r_ref;
        }
    return oq;
}

inline double rms(double sum_sq, int count) {
    return count > 0 ? std::sqrt(sum_sq / count) : std::numeric_limits<double>::quiet_NaN();
}

inline void fill_diagnostics(EpisodeLog& log, const Policy& policy, PolicyKind kind,
                             const WorldModel& world, const OracleQuantities& oq) {
    const int N = world.size(), S = world.n_states();

    if (const auto* idx = policy.index_table()) {
        double ss = 0.0;
        for (int n = 0; n < N; ++n)
            for (int s = 0; s < S; ++s) {
                double d = (*idx)[n][s] - oq.index[n][s];
                ss += d * d;
            }
        log.index_error = rms(ss, N * S);
    }

    if (const auto* est = policy.transitions()) {
        double ss = 0.0;
        for (int n = 0; n < N; ++n)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < 2; ++a) {
                    auto row = est->kernel_row(n, s, a);
                    const auto& truth = world.arms[n].kernel(a)[s];
                    for (int sp = 0; sp < S; ++sp) {
                        double d = row[sp] - truth[sp];
                        ss += d * d;
                    }
                }
        log.p_error = rms(ss, N * S * 2 * S);
    }

    if (const auto* pref = policy.preference()) {
        double ssf = 0.0, ssr = 0.0;
        for (int n = 0; n < N; ++n)
            for (int s = 0; s < S; ++s) {
                int g = global_index(n, s, S);
                double df = pref->f_hat[n][s] - oq.f_true[g];
                double dr = pref->q_tilde[n][s] - oq.q_true[g];
                ssf += df * df;
                ssr += dr * dr;
            }
        log.f_error = rms(ssf, N * S);
        log.r_error = rms(ssr, N * S);
    } else if (kind == PolicyKind::mle_lp) {
        const auto& fit = static_cast<const MleLpPolicy&>(policy).fit();
        double ssf = 0.0, ssr = 0.0;
        for (int g = 0; g < N * S; ++g) {
            double df = sigmoid(fit.r_hat[g]) - oq.f_true[g];
            double dr = fit.r_hat[g] - oq.q_true[g];
            ssf += df * df;
            ssr += dr * dr;
        }
        log.f_error = rms(ssf, N * S);
        log.r_error = rms(ssr, N * S);
    }
}

// The simulation loop, separated so a test can drive it with an arbitrary
// (possibly misbehaving) policy. The activation guard lives here.
inline std::vector<EpisodeLog> run_episodes(const WorldModel& world, Policy& policy,
                                            const ExperimentConfig& cfg, PolicyKind kind,
                                            const OracleQuantities& oq) {
    const int N = world.size(), S = world.n_states(), B = world.budget;
    Rng rng(cfg.seed);
    std::vector<int> states = world.states;
    std::vector<EpisodeLog> logs;
    logs.reserve(cfg.n_episodes);

    for (int k = 1; k <= cfg.n_episodes; ++k) {
        policy.begin_episode(k, rng);

        EpisodeLog log;
        log.episode = k;
        log.activations.assign(N, 0);
        fill_diagnostics(log, policy, kind, world, oq);

        for (int t = 0; t < cfg.horizon; ++t) {
            auto active = policy.activate(states, rng);
            if (static_cast<int>(active.size()) != std::min(B, N))
                throw std::logic_error("policy activated a wrong number of arms");
            std::vector<char> is_active(N, 0);
            for (int n : active) {
                if (n < 0 || n >= N || is_active[n])
                    throw std::logic_error("policy produced an invalid activation set");
                is_active[n] = 1;
                ++log.activations[n];
            }

            double step_reward = 0.0;
            for (int n = 0; n < N; ++n)
                if (cfg.reward_accounting == RewardAccounting::all_arms || is_active[n])
                    step_reward += world.arms[n].rewards[states[n]];
            log.episodic_reward += step_reward;

            if (policy.wants_duels() && static_cast<int>(active.size()) >= 2) {
                auto pairs = schedule_duels(rng, static_cast<int>(active.size()));
                for (auto [pi, pj] : pairs) {
                    int ni = active[pi], nj = active[pj];
                    double p = bt_preference(world.arms[ni].rewards[states[ni]],
                                             world.arms[nj].rewards[states[nj]]);
                    int win = sample_comparison(rng, p);
                    policy.observe_duel(global_index(ni, states[ni], S),
                                        global_index(nj, states[nj], S), win == 1);
                    ++log.duels;
                }
            }

            std::vector<int> next(N);
            for (int n = 0; n < N; ++n) {
                int a = is_active[n] ? 1 : 0;
                next[n] = step_arm(rng, world.arms[n], states[n], a);
                policy.observe_transition(n, states[n], a, next[n]);
                ++log.transitions;
            }
            states = std::move(next);
        }
        logs.push_back(std::move(log));
    }
    return logs;
}

}  // namespace detail

inline void validate_config(const WorldModel& world, const ExperimentConfig& cfg) {
    world.validate();
    if (cfg.n_episodes < 1) throw std::invalid_argument("n_episodes must be >= 1");
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0,1)");
    if (cfg.reference_arm < 0 || cfg.reference_arm >= world.size())
        throw std::invalid_argument("reference arm out of range");
    if (cfg.reference_state < 0 || cfg.reference_state >= world.n_states())
        throw std::invalid_argument("reference state out of range");
}

inline RunResult run_experiment(const WorldModel& world, PolicyKind kind,
                                const ExperimentConfig& cfg) {
    validate_config(world, cfg);
    auto t0 = std::chrono::steady_clock::now();
    const int N = world.size(), S = world.n_states();

    RunResult result;
    {
        auto lp = build_exact_lp(world.dynamics(), world.reward_table(), world.budget);
        auto sol = solve_lp(lp);
        if (sol.status != LpStatus::optimal) throw std::runtime_error("oracle planning LP failed");
        result.j_star = sol.objective_value;
        result.oracle_index = index_table_from_mu(sol.x, N, S);
    }
    auto oq = detail::oracle_quantities(world, cfg, result.oracle_index);

    auto policy = make_policy(kind, world, cfg, result.oracle_index);
    result.logs = detail::run_episodes(world, *policy, cfg, kind, oq);

    if (kind == PolicyKind::dopl)
        result.lp_failures = static_cast<DoplPolicy&>(*policy).lp_failures();
    else if (kind == PolicyKind::mle_lp)
        result.lp_failures = static_cast<MleLpPolicy&>(*policy).lp_failures();

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// Least-squares slope of ln(max(cum,1)) against ln(t) over the second half.
inline double fit_loglog_slope(const std::vector<double>& cumulative, bool* defined = nullptr) {
    const int K = static_cast<int>(cumulative.size());
    int start = K / 2;  // episodes start+1 .. K, 1-based
    int m = K - start;
    if (defined) *defined = false;
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0;
    for (int i = start; i < K; ++i) {
        sx += std::log(static_cast<double>(i + 1));
        sy += std::log(std::max(cumulative[i], 1.0));
    }
    double mx = sx / m, my = sy / m, sxx = 0, sxy = 0;
    for (int i = start; i < K; ++i) {
        double dx = std::log(static_cast<double>(i + 1)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(std::max(cumulative[i], 1.0)) - my);
    }
    if (sxx <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (defined) *defined = true;
    return sxy / sxx;
}

inline RegretReport compute_regret_with_gain(const std::vector<EpisodeLog>& logs, double j_star,
                                             const ExperimentConfig& cfg) {
    RegretReport rep;
    rep.j_star = j_star;
    double cum = 0.0, max_abs = 0.0;
    for (const auto& log : logs) {
        double r = cfg.horizon * j_star - log.episodic_reward;
        rep.per_episode.push_back(r);
        cum += r;
        rep.cumulative.push_back(cum);
        max_abs = std::max(max_abs, std::abs(r));
    }
    if (max_abs == 0.0) return rep;  // zero-regret degenerate: slope not applicable
    rep.slope = fit_loglog_slope(rep.cumulative, &rep.slope_defined);
    return rep;
}

inline RegretReport compute_regret(const std::vector<EpisodeLog>& logs, const WorldModel& world,
                                   const ExperimentConfig& cfg) {
    return compute_regret_with_gain(logs, optimal_gain(world), cfg);
}

// ---------------------------------------------------------------------------
// Emission. The CSV is the compatibility contract and must stay byte-stable:
// fixed header, %.10g floats, "nan" for not-applicable diagnostics.
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "episode,episodic_reward,cumulative_regret,index_error,F_error,P_error,R_error";

struct RunMeta {
    std::string env_name;
    std::string policy_name;
    int budget = 0;
    ExperimentConfig cfg;
    std::string fingerprint;
};

inline void write_run_csv(const std::vector<EpisodeLog>& logs, const RegretReport& rep,
                          const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write CSV: " + path);
    std::fprintf(f, "%s\n", kCsvHeader);
    for (size_t i = 0; i < logs.size(); ++i) {
        const auto& log = logs[i];
        std::fprintf(f, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", log.episode,
                     log.episodic_reward, rep.cumulative[i], log.index_error, log.f_error,
                     log.p_error, log.r_error);
    }
    std::fclose(f);
}

inline void write_manifest(const RunMeta& meta, const RunResult& result, const RegretReport& rep,
                           const std::string& path) {
    json j;
    j["config"] = {
        {"env", meta.env_name},
        {"policy", meta.policy_name},
        {"n_episodes", meta.cfg.n_episodes},
        {"horizon", meta.cfg.horizon},
        {"budget", meta.budget},
        {"epsilon", meta.cfg.epsilon},
        {"seed", meta.cfg.seed},
        {"reference_arm", meta.cfg.reference_arm},
        {"reference_state", meta.cfg.reference_state},
        {"reward_accounting",
         meta.cfg.reward_accounting == RewardAccounting::all_arms ? "all_arms" : "active_only"},
    };
    j["environment_fingerprint"] = meta.fingerprint;
    j["j_star"] = result.j_star;
    if (rep.slope_defined)
        j["regret_slope"] = rep.slope;
    else
        j["regret_slope"] = nullptr;
    j["lp_failures"] = result.lp_failures;
    j["wall_clock_seconds"] = result.wall_seconds;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

inline void emit_outputs(const RunMeta& meta, const RunResult& result, const RegretReport& rep,
                         const std::string& out_dir, const std::string& basename) {
    std::filesystem::create_directories(out_dir);
    write_run_csv(result.logs, rep, out_dir + "/" + basename + ".csv");
    write_manifest(meta, result, rep, out_dir + "/" + basename + ".manifest.json");
}

inline void write_aggregate_csv(const std::vector<RunResult>& results,
                                const std::vector<RegretReport>& reports,
                                const std::string& path) {
    if (results.empty()) return;
    size_t K = results[0].logs.size();
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write CSV: " + path);
    std::fprintf(f,
                 "episode,episodic_reward_mean,episodic_reward_std,"
                 "cumulative_regret_mean,cumulative_regret_std\n");
    const double n = static_cast<double>(results.size());
    for (size_t i = 0; i < K; ++i) {
        double mr = 0, mc = 0;
        for (size_t s = 0; s < results.size(); ++s) {
            mr += results[s].logs[i].episodic_reward;
            mc += reports[s].cumulative[i];
        }
        mr /= n;
        mc /= n;
        double vr = 0, vc = 0;
        for (size_t s = 0; s < results.size(); ++s) {
            vr += std::pow(results[s].logs[i].episodic_reward - mr, 2);
            vc += std::pow(reports[s].cumulative[i] - mc, 2);
        }
        double sr = n > 1 ? std::sqrt(vr / (n - 1)) : 0.0;
        double sc = n > 1 ? std::sqrt(vc / (n - 1)) : 0.0;
        std::fprintf(f, "%d,%.10g,%.10g,%.10g,%.10g\n", results[0].logs[i].episode, mr, sr, mc, sc);
    }
    std::fclose(f);
}

// Environment variable override for the output location, nothing else.
inline std::string resolve_output_dir(const std::string& cli_dir) {
    const char* env = std::getenv("DOPL_OUTPUT_DIR");
    if (env && *env) return env;
    return cli_dir;
}

// One thread per seed; each replication is strictly sequential internally.
inline std::vector<RunResult> run_seeds(const WorldModel& world, PolicyKind kind,
                                        ExperimentConfig cfg, const std::vector<uint64_t>& seeds) {
    std::vector<RunResult> results(seeds.size());
    std::vector<std::thread> threads;
    threads.reserve(seeds.size());
    for (size_t i = 0; i < seeds.size(); ++i) {
        threads.emplace_back([&, i] {
            ExperimentConfig c = cfg;
            c.seed = seeds[i];
            results[i] = run_experiment(world, kind, c);
        });
    }
    for (auto& t : threads) t.join();
    return results;
}

}  // namespace dopl
