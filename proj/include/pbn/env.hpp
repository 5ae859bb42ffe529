#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "pbn/attractors.hpp"
#include "pbn/dynamics.hpp"
#include "pbn/spec.hpp"
#include "pbn/state.hpp"

namespace pbn {

enum class RewardMode { kFull, kTargetOnly };

struct ControlConfig {
    AttractorSet target;
    std::vector<AttractorSet> all_attractors;  // required in full mode, must contain target
    int horizon = 11;
    double success_reward = 5.0;  // must be > 2
    RewardMode reward_mode = RewardMode::kFull;

    void validate() const {
        if (target.states.empty()) throw std::invalid_argument("target attractor is empty");
        if (!(success_reward > 2.0))
            throw std::invalid_argument("success reward must be > 2");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
        if (reward_mode == RewardMode::kFull) {
            bool found = false;
            for (const AttractorSet& a : all_attractors)
                if (a.states == target.states) found = true;
            if (!found)
                throw std::invalid_argument("full reward mode needs the target among all_attractors");
        }
    }
};

inline double reward_of(const NetworkState& s_next, const ControlConfig& cfg) {
    if (cfg.target.contains(s_next.bits)) return cfg.success_reward;
    if (cfg.reward_mode == RewardMode::kFull) {
        for (const AttractorSet& a : cfg.all_attractors)
            if (a.states != cfg.target.states && a.contains(s_next.bits)) return -2.0;
    }
    return -1.0;
}

enum class TerminalReason { kNone, kSuccess, kHorizon };

struct StepOutcome {
    NetworkState next_state;
    double reward = 0.0;
    bool terminal = false;
    TerminalReason reason = TerminalReason::kNone;
};

// The control MDP: each action flips at most one node, then one natural
// evolution step follows. Episodes end on entering the target or at H steps.
class ControlEnv {
   public:
    ControlEnv(const PBNSpec& spec, ControlConfig cfg) : spec_(spec), cfg_(std::move(cfg)) {
        cfg_.validate();
    }

    const ControlConfig& config() const { return cfg_; }
    const PBNSpec& spec() const { return spec_; }
    const NetworkState& state() const { return state_; }
    int steps_taken() const { return steps_; }
    bool terminal() const { return terminal_; }

    // Uniform random non-target initial state; step counter zeroed.
    NetworkState reset(std::mt19937_64& rng) {
        std::uniform_int_distribution<std::uint32_t> uniform_state(
            0, static_cast<std::uint32_t>((std::uint64_t{1} << spec_.n) - 1));
        do {
            state_ = NetworkState(uniform_state(rng), spec_.n);
        } while (cfg_.target.contains(state_.bits));
        steps_ = 0;
        terminal_ = false;
        return state_;
    }

    StepOutcome step(int action, std::mt19937_64& rng) {
        if (terminal_) throw std::logic_error("step() called on a terminal episode");
        const NetworkState perturbed = apply_intervention(state_, action);
        const NetworkState next = step_natural(spec_, perturbed, rng);
        ++steps_;
        StepOutcome out;
        out.next_state = next;
        out.reward = reward_of(next, cfg_);
        if (cfg_.target.contains(next.bits)) {
            out.terminal = true;
            out.reason = TerminalReason::kSuccess;
        } else if (steps_ >= cfg_.horizon) {
            out.terminal = true;
            out.reason = TerminalReason::kHorizon;
        }
        state_ = next;
        terminal_ = out.terminal;
        return out;
    }

   private:
    PBNSpec spec_;
    ControlConfig cfg_;
    NetworkState state_;
    int steps_ = 0;
    bool terminal_ = true;  // must reset() before stepping
};

}  // namespace pbn
