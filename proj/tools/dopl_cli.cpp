#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dopl/harness.hpp"

namespace {

struct CommonArgs {
    std::string env = "cpap";
    std::string preset;
    std::string env_file;
    std::string out_dir = "out";
    int n_episodes = -1;
    int horizon = -1;
    double epsilon = -1.0;
    int budget = -1;
    std::vector<uint64_t> seeds;
    uint64_t env_seed = 12345;  // ranged environments are drawn once from this
    int reference_arm = 0;
    int reference_state = 0;
    std::string accounting = "all_arms";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--env", a.env, "environment")
        ->check(CLI::IsMember({"app_marketing", "cpap", "armman", "custom"}));
    cmd->add_option("--env-file", a.env_file, "JSON model for --env custom");
    cmd->add_option("--preset", a.preset, "paper or desk episode scale")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("-K,--episodes", a.n_episodes, "episode count");
    cmd->add_option("-H,--horizon", a.horizon, "steps per episode");
    cmd->add_option("--eps", a.epsilon, "confidence parameter");
    cmd->add_option("-B,--budget", a.budget, "activation budget override");
    cmd->add_option("--seed", a.seeds, "run seed, repeatable for replications");
    cmd->add_option("--env-seed", a.env_seed, "seed for sampled environment parameters");
    cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--reference-arm", a.reference_arm, "reference arm id");
    cmd->add_option("--reference-state", a.reference_state, "reference state id");
    cmd->add_option("--accounting", a.accounting, "reward accounting")
        ->check(CLI::IsMember({"all_arms", "active_only"}));
}

dopl::EnvKind env_kind(const std::string& s) {
    if (s == "app_marketing") return dopl::EnvKind::app_marketing;
    if (s == "cpap") return dopl::EnvKind::cpap;
    if (s == "armman") return dopl::EnvKind::armman;
    return dopl::EnvKind::custom;
}

dopl::PolicyKind policy_kind(const std::string& s) {
    if (s == "dopl") return dopl::PolicyKind::dopl;
    if (s == "oracle") return dopl::PolicyKind::oracle;
    if (s == "random") return dopl::PolicyKind::random;
    return dopl::PolicyKind::mle_lp;
}

dopl::WorldModel build_env(const CommonArgs& a) {
    switch (env_kind(a.env)) {
        case dopl::EnvKind::app_marketing: return dopl::build_app_marketing();
        case dopl::EnvKind::cpap: return dopl::build_cpap();
        case dopl::EnvKind::armman: {
            dopl::Rng rng(a.env_seed);
            return dopl::build_armman(rng);
        }
        case dopl::EnvKind::custom:
            if (a.env_file.empty())
                throw CLI::ValidationError("--env custom requires --env-file");
            return dopl::load_world(a.env_file);
    }
    throw CLI::ValidationError("unknown environment");
}

dopl::ExperimentConfig build_config(const CommonArgs& a) {
    auto p = dopl::preset_for(env_kind(a.env), a.preset == "desk");
    dopl::ExperimentConfig cfg;
    cfg.n_episodes = a.n_episodes > 0 ? a.n_episodes : p.n_episodes;
    cfg.horizon = a.horizon > 0 ? a.horizon : p.horizon;
    cfg.epsilon = a.epsilon > 0 ? a.epsilon : p.epsilon;
    cfg.reference_arm = a.reference_arm;
    cfg.reference_state = a.reference_state;
    cfg.reward_accounting = a.accounting == "active_only" ? dopl::RewardAccounting::active_only
                                                          : dopl::RewardAccounting::all_arms;
    return cfg;
}

int run_one_policy(const CommonArgs& a, const std::string& policy) {
    auto world = build_env(a);
    if (a.budget > 0) world.budget = a.budget;
    auto cfg = build_config(a);
    auto seeds = a.seeds.empty() ? std::vector<uint64_t>{0} : a.seeds;
    auto kind = policy_kind(policy);
    std::string out_dir = dopl::resolve_output_dir(a.out_dir);
    std::string label = a.env + "_" + policy;
    std::string fingerprint = dopl::world_fingerprint(world);

    auto results = dopl::run_seeds(world, kind, cfg, seeds);
    std::vector<dopl::RegretReport> reports;
    for (size_t i = 0; i < results.size(); ++i) {
        dopl::ExperimentConfig c = cfg;
        c.seed = seeds[i];
        auto rep = dopl::compute_regret_with_gain(results[i].logs, results[i].j_star, c);
        dopl::RunMeta meta{a.env, policy, world.budget, c, fingerprint};
        dopl::emit_outputs(meta, results[i], rep, out_dir,
                           label + "_seed" + std::to_string(seeds[i]));
        std::printf("%s seed=%llu episodes=%d final_cum_regret=%.6g slope=%.4g lp_failures=%d\n",
                    label.c_str(), static_cast<unsigned long long>(seeds[i]), cfg.n_episodes,
                    rep.cumulative.empty() ? 0.0 : rep.cumulative.back(),
                    rep.slope_defined ? rep.slope : std::numeric_limits<double>::quiet_NaN(),
                    results[i].lp_failures);
        reports.push_back(std::move(rep));
    }
    if (results.size() > 1)
        dopl::write_aggregate_csv(results, reports, out_dir + "/" + label + "_aggregate.csv");
    return 0;
}

int cmd_regret_fit(const std::vector<std::string>& files) {
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) {
            std::fprintf(stderr, "cannot open %s\n", path.c_str());
            return 1;
        }
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> cum;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string field;
            for (int i = 0; i < 3 && std::getline(ss, field, ','); ++i) {
            }
            cum.push_back(std::stod(field));
        }
        bool defined = false;
        double slope = dopl::fit_loglog_slope(cum, &defined);
        if (defined)
            std::printf("{\"file\": \"%s\", \"episodes\": %zu, \"slope\": %.6g}\n", path.c_str(),
                        cum.size(), slope);
        else
            std::printf("{\"file\": \"%s\", \"episodes\": %zu, \"slope\": null}\n", path.c_str(),
                        cum.size());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restless-bandit preference-feedback experiment runner"};
    app.require_subcommand(1);

    CommonArgs run_args;
    std::string run_policy = "dopl";
    auto* run = app.add_subcommand("run", "single environment/policy experiment");
    add_common(run, run_args);
    run->add_option("--policy", run_policy, "policy")
        ->check(CLI::IsMember({"dopl", "oracle", "random", "mle_lp"}));

    CommonArgs sweep_args;
    std::vector<std::string> sweep_policies = {"dopl", "oracle", "random", "mle_lp"};
    auto* sweep = app.add_subcommand("sweep", "all policies on one environment");
    add_common(sweep, sweep_args);
    sweep->add_option("--policies", sweep_policies, "subset of policies to sweep");

    std::vector<std::string> fit_files;
    auto* fit = app.add_subcommand("regret-fit", "fit the log-log regret slope of existing CSVs");
    fit->add_option("csv", fit_files, "run CSV files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_one_policy(run_args, run_policy);
        if (sweep->parsed()) {
            for (const auto& p : sweep_policies) {
                int rc = run_one_policy(sweep_args, p);
                if (rc != 0) return rc;
            }
            return 0;
        }
        if (fit->parsed()) return cmd_regret_fit(fit_files);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
