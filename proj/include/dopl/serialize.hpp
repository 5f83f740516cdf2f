#pragma once
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dopl/preference.hpp"
#include "dopl/transition.hpp"
#include "dopl/world.hpp"

namespace dopl {

using nlohmann::json;

// FNV-1a over the raw bytes of the model parameters. Stable across runs on
// the same platform, and cheap enough to recompute for every manifest.
class Fnv1a {
public:
    void feed(const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void feed(double v) { feed(&v, sizeof v); }
    void feed(int v) { feed(&v, sizeof v); }
    [[nodiscard]] uint64_t value() const { return h_; }
    [[nodiscard]] std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string world_fingerprint(const WorldModel& world) {
    Fnv1a h;
    h.feed(static_cast<int>(world.arms.size()));
    h.feed(world.budget);
    for (const auto& arm : world.arms) {
        h.feed(arm.n_states);
        for (const auto& row : arm.kernel_passive)
            for (double v : row) h.feed(v);
        for (const auto& row : arm.kernel_active)
            for (double v : row) h.feed(v);
        for (double v : arm.rewards) h.feed(v);
    }
    for (int s : world.states) h.feed(s);
    return h.hex();
}

// ---------------------------------------------------------------------------
// Custom environments from JSON:
// { "budget": B, "arms": [ { "passive": [[..]..], "active": [[..]..],
//   "rewards": [..], "initial_state": 0 }, ... ] }
// ---------------------------------------------------------------------------

inline WorldModel world_from_json(const json& j) {
    WorldModel w;
    w.budget = j.at("budget").get<int>();
    for (const auto& ja : j.at("arms")) {
        ArmModel arm;
        arm.kernel_passive = ja.at("passive").get<Kernel>();
        arm.kernel_active = ja.at("active").get<Kernel>();
        arm.rewards = ja.at("rewards").get<std::vector<double>>();
        arm.n_states = static_cast<int>(arm.rewards.size());
        w.arms.push_back(std::move(arm));
        w.states.push_back(ja.value("initial_state", 0));
    }
    w.validate();
    return w;
}

inline WorldModel load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open environment file: " + path);
    json j;
    in >> j;
    return world_from_json(j);
}

// ---------------------------------------------------------------------------
// Learning-state snapshots: transition counts, duel ledger, and the episode
// index they were current as of. Enough to resume or audit a run.
// ---------------------------------------------------------------------------

inline json snapshot_to_json(const TransitionEstimate& est, const ComparisonLedger& ledger,
                             int episode) {
    json j;
    j["episode"] = episode;
    j["n_arms"] = est.n_arms();
    j["n_states"] = est.n_states();
    j["visits"] = est.raw_visits();
    j["transitions"] = est.raw_transitions();
    j["duel_counts"] = ledger.raw_counts();
    j["duel_wins"] = ledger.raw_wins();
    return j;
}

struct Snapshot {
    TransitionEstimate transitions;
    ComparisonLedger ledger;
    int episode = 0;
};

inline Snapshot snapshot_from_json(const json& j) {
    int n = j.at("n_arms").get<int>();
    int s = j.at("n_states").get<int>();
    Snapshot snap{TransitionEstimate(n, s), ComparisonLedger(n, s), j.at("episode").get<int>()};
    snap.transitions.load_counts(j.at("visits").get<std::vector<int64_t>>(),
                                 j.at("transitions").get<std::vector<int64_t>>());
    snap.ledger.load(j.at("duel_counts").get<std::vector<int64_t>>(),
                     j.at("duel_wins").get<std::vector<int64_t>>());
    return snap;
}

}  // namespace dopl
