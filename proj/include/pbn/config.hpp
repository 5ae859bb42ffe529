#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbn/agent.hpp"
#include "pbn/env.hpp"

namespace pbn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run configuration for the train / eval / baseline commands. The target is
// either an explicit list of state bitstrings or "auto" (least-frequent
// attractor, chosen from exact attractor analysis plus Monte Carlo).
struct RunConfig {
    std::string spec_path;
    std::vector<std::string> target_states;  // empty => auto-least-frequent
    RewardMode reward_mode = RewardMode::kFull;
    TrainConfig train;
    int frequency_rollouts = kDefaultFrequencyRollouts;
    std::string out_dir = ".";
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed run config: ") + e.what());
    }
    RunConfig cfg;
    try {
        cfg.spec_path = doc.at("spec").get<std::string>();
        if (doc.contains("target") && doc["target"].is_array())
            cfg.target_states = doc["target"].get<std::vector<std::string>>();
        if (doc.contains("reward_mode")) {
            const std::string mode = doc["reward_mode"].get<std::string>();
            if (mode == "full")
                cfg.reward_mode = RewardMode::kFull;
            else if (mode == "target-only")
                cfg.reward_mode = RewardMode::kTargetOnly;
            else
                throw ConfigError("reward_mode must be 'full' or 'target-only'");
        }
        TrainConfig& t = cfg.train;
        auto opt = [&doc](const char* key, auto& field) {
            if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
        };
        opt("iterations", t.iterations);
        opt("horizon", t.horizon);
        opt("success_reward", t.success_reward);
        opt("buffer_capacity", t.buffer_capacity);
        opt("gamma", t.gamma);
        opt("sync_period", t.sync_period);
        opt("batch_size", t.batch_size);
        opt("learning_rate", t.learning_rate);
        opt("eps_start", t.eps_start);
        opt("eps_end", t.eps_end);
        opt("eps_decay_fraction", t.eps_decay_fraction);
        opt("alpha", t.alpha);
        opt("beta0", t.beta0);
        opt("priority_constant", t.priority_constant);
        opt("hidden_units", t.hidden_units);
        opt("seed", t.seed);
        opt("frequency_rollouts", cfg.frequency_rollouts);
        if (doc.contains("priority_mode")) {
            const std::string mode = doc["priority_mode"].get<std::string>();
            if (mode == "loss")
                t.priority_mode = PriorityMode::kSquaredLoss;
            else if (mode == "abs-td")
                t.priority_mode = PriorityMode::kAbsTdError;
            else
                throw ConfigError("priority_mode must be 'loss' or 'abs-td'");
        }
        if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad run config field: ") + e.what());
    }
    try {
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

// FNV-1a, used to fingerprint the spec content in run manifests.
inline std::string content_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace pbn
