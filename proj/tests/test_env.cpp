#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pbn/attractors.hpp"
#include "pbn/env.hpp"
#include "pbn/spec.hpp"

using namespace pbn;

namespace {

BooleanFunction named(const std::string& name, int t, double p) {
    return {detail::named_table(name, t), p};
}

// 4-node deterministic AND network: attractors {0000} and {1111}.
PBNSpec and_network4() {
    PBNSpec spec;
    spec.n = 4;
    for (int i = 0; i < 4; ++i)
        spec.nodes.push_back({{0, 1, 2, 3}, {named("AND", 4, 1.0)}});
    return spec;
}

ControlConfig config_for(const PBNSpec& spec, std::size_t target_index, RewardMode mode) {
    const auto attractors = terminal_sccs(build_stg(spec));
    ControlConfig cfg;
    cfg.target = attractors[target_index];
    cfg.all_attractors = attractors;
    cfg.reward_mode = mode;
    cfg.horizon = 5;
    cfg.success_reward = 5.0;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    const PBNSpec spec = and_network4();
    ControlConfig cfg = config_for(spec, 1, RewardMode::kFull);
    CHECK_NOTHROW(cfg.validate());
    cfg.success_reward = 2.0;
    CHECK_THROWS(cfg.validate());
    cfg.success_reward = 5.0;
    cfg.all_attractors.clear();
    CHECK_THROWS(cfg.validate());  // full mode needs target among all
    cfg.reward_mode = RewardMode::kTargetOnly;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("reward cases of both modes") {
    const PBNSpec spec = and_network4();
    const ControlConfig full = config_for(spec, 1, RewardMode::kFull);
    const ControlConfig target_only = config_for(spec, 1, RewardMode::kTargetOnly);
    const NetworkState target = NetworkState::from_string("1111");
    const NetworkState other_attractor = NetworkState::from_string("0000");
    const NetworkState ordinary = NetworkState::from_string("0101");
    CHECK(reward_of(target, full) == 5.0);
    CHECK(reward_of(other_attractor, full) == -2.0);
    CHECK(reward_of(ordinary, full) == -1.0);
    CHECK(reward_of(target, target_only) == 5.0);
    CHECK(reward_of(other_attractor, target_only) == -1.0);  // -2 unreachable
    CHECK(reward_of(ordinary, target_only) == -1.0);
}

TEST_CASE("reset excludes the target and is deterministic per seed") {
    const PBNSpec spec = and_network4();
    ControlEnv env(spec, config_for(spec, 1, RewardMode::kFull));
    std::mt19937_64 a(42), b(42);
    ControlEnv env2(spec, config_for(spec, 1, RewardMode::kFull));
    for (int i = 0; i < 200; ++i) {
        const NetworkState s = env.reset(a);
        CHECK_FALSE(env.config().target.contains(s.bits));
        CHECK(env2.reset(b) == s);
    }
}

TEST_CASE("reset distribution is uniform over non-target states") {
    const PBNSpec spec = and_network4();
    ControlEnv env(spec, config_for(spec, 1, RewardMode::kFull));
    std::mt19937_64 rng(7);
    const int resets = 100000;
    std::vector<long> counts(16, 0);
    for (int i = 0; i < resets; ++i) ++counts[env.reset(rng).bits];
    CHECK(counts[0b1111] == 0);
    const double expected = resets / 15.0;
    const double sigma = std::sqrt(resets * (1.0 / 15) * (14.0 / 15));
    for (int s = 0; s < 15; ++s)
        CHECK(std::abs(counts[static_cast<std::size_t>(s)] - expected) <= 4 * sigma);
}

TEST_CASE("success terminates immediately with the configured reward") {
    const PBNSpec spec = and_network4();
    ControlEnv env(spec, config_for(spec, 1, RewardMode::kFull));
    std::mt19937_64 rng(1);
    // start from 0111; flipping node 1 gives 1111, whose AND step stays 1111
    bool exercised = false;
    for (int attempt = 0; attempt < 1000 && !exercised; ++attempt) {
        const NetworkState s = env.reset(rng);
        if (s.to_string() != "0111") continue;
        const StepOutcome out = env.step(1, rng);
        CHECK(out.terminal);
        CHECK(out.reason == TerminalReason::kSuccess);
        CHECK(out.reward == 5.0);
        CHECK(out.next_state.to_string() == "1111");
        CHECK_THROWS_AS(env.step(0, rng), std::logic_error);
        exercised = true;
    }
    CHECK(exercised);
}

TEST_CASE("horizon cut after H steps; rewards stay in the allowed set") {
    const PBNSpec spec = and_network4();
    ControlConfig cfg = config_for(spec, 1, RewardMode::kFull);
    cfg.horizon = 3;
    ControlEnv env(spec, cfg);
    std::mt19937_64 rng(5);
    for (int ep = 0; ep < 200; ++ep) {
        env.reset(rng);
        int steps = 0;
        StepOutcome out;
        do {
            out = env.step(0, rng);  // no-op actions still consume the horizon
            ++steps;
            CHECK((out.reward == 5.0 || out.reward == -2.0 || out.reward == -1.0));
        } while (!out.terminal);
        CHECK(steps <= 3);
        if (out.reason == TerminalReason::kHorizon) CHECK(steps == 3);
    }
}

TEST_CASE("each action is followed by exactly one natural step") {
    // deterministic 2-node cycle: node0' = node1, node1' = node0
    PBNSpec spec;
    spec.n = 2;
    spec.nodes.push_back({{1}, {named("OR", 1, 1.0)}});
    spec.nodes.push_back({{0}, {named("OR", 1, 1.0)}});
    const auto attractors = terminal_sccs(build_stg(spec));
    ControlConfig cfg;
    cfg.target = attractors[0];  // {00}
    cfg.all_attractors = attractors;
    cfg.horizon = 10;
    ControlEnv env(spec, cfg);
    std::mt19937_64 rng(9);
    NetworkState s = env.reset(rng);
    while (env.terminal()) s = env.reset(rng);
    // intervention u then one swap step, exactly
    const NetworkState expected = [&] {
        const NetworkState flipped = apply_intervention(s, 1);
        return NetworkState::from_string({flipped.to_string()[1], flipped.to_string()[0]});
    }();
    const StepOutcome out = env.step(1, rng);
    CHECK(out.next_state == expected);
}
