#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "pbn/spec.hpp"
#include "pbn/state.hpp"

namespace pbn {

inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 20;

struct SupportTooLarge : std::runtime_error {
    SupportTooLarge()
        : std::runtime_error("transition support too large; use Monte Carlo methods instead") {}
};

// Truth-table lookup: inputs interpreted as an integer, first input = LSB.
inline std::uint8_t eval_function(const std::vector<std::uint8_t>& table,
                                  const std::vector<std::uint8_t>& input_bits) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < input_bits.size(); ++i)
        if (input_bits[i]) index |= (std::size_t{1} << i);
    return table[index];
}

inline std::size_t input_pattern(const NodeSpec& node, const NetworkState& s) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < node.inputs.size(); ++i)
        if (s.get(node.inputs[i])) index |= (std::size_t{1} << i);
    return index;
}

// P(node i = 1 at t+1 | state s): probability-weighted sum of function outputs.
inline double node_next_distribution(const PBNSpec& spec, const NetworkState& s, int i) {
    const NodeSpec& node = spec.nodes[static_cast<std::size_t>(i)];
    const std::size_t pattern = input_pattern(node, s);
    double q = 0.0;
    for (const BooleanFunction& f : node.functions)
        if (f.table[pattern]) q += f.p;
    return q;
}

// One natural evolution step: every node sampled independently.
inline NetworkState step_natural(const PBNSpec& spec, const NetworkState& s,
                                 std::mt19937_64& rng) {
    NetworkState next(0, spec.n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < spec.n; ++i) {
        const double q = node_next_distribution(spec, s, i);
        if (unit(rng) < q) next.bits |= (1u << i);
    }
    return next;
}

struct TransitionSupport {
    std::vector<NetworkState> states;
    std::vector<double> probabilities;

    std::size_t size() const { return states.size(); }
};

// Exact one-step distribution via the per-node product factorization.
// Each node contributes at most two branches; zero-probability branches pruned.
// Node distributions within rounding error of 0 or 1 are treated as
// deterministic so that float accumulation in the per-node sum cannot
// introduce spurious support states.
inline TransitionSupport transition_support(const PBNSpec& spec, const NetworkState& s,
                                            std::size_t cap = kDefaultSupportCap) {
    constexpr double kRoundoff = 1e-12;
    std::vector<std::uint32_t> states{0};
    std::vector<double> probs{1.0};
    for (int i = 0; i < spec.n; ++i) {
        const double q = node_next_distribution(spec, s, i);
        if (q <= kRoundoff) continue;  // bit stays 0 in every branch
        if (q >= 1.0 - kRoundoff) {
            for (auto& b : states) b |= (1u << i);
            continue;
        }
        const std::size_t m = states.size();
        if (2 * m > cap) throw SupportTooLarge();
        states.reserve(2 * m);
        probs.reserve(2 * m);
        for (std::size_t k = 0; k < m; ++k) {
            states.push_back(states[k] | (1u << i));
            probs.push_back(probs[k] * q);
            probs[k] *= (1.0 - q);
        }
    }
    TransitionSupport out;
    out.states.reserve(states.size());
    for (std::uint32_t b : states) out.states.emplace_back(b, spec.n);
    out.probabilities = std::move(probs);
    return out;
}

// Definition: u = 0 is no intervention, u in [1, n] flips node u-1.
inline NetworkState apply_intervention(const NetworkState& s, int u) {
    if (u < 0 || u > s.n)
        throw std::out_of_range("intervention index " + std::to_string(u) + " not in [0, n]");
    if (u == 0) return s;
    return s.flipped(u - 1);
}

}  // namespace pbn
