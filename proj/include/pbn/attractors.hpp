#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pbn/dynamics.hpp"
#include "pbn/spec.hpp"
#include "pbn/state.hpp"

namespace pbn {

inline constexpr int kDefaultStgNodeLimit = 20;

// Successor lists over all 2^n states, CSR layout. Probabilities are not
// stored; only nonzero-probability reachability matters here.
struct StateTransitionGraph {
    int n = 0;
    std::vector<std::uint64_t> offsets;  // size 2^n + 1
    std::vector<std::uint32_t> targets;

    std::size_t num_states() const { return std::size_t{1} << n; }

    std::pair<const std::uint32_t*, const std::uint32_t*> successors(std::uint32_t s) const {
        return {targets.data() + offsets[s], targets.data() + offsets[s + 1]};
    }
};

struct AttractorSet {
    int id = 0;
    std::vector<std::uint32_t> states;  // sorted ascending

    bool contains(std::uint32_t s) const {
        return std::binary_search(states.begin(), states.end(), s);
    }
};

namespace detail {

// Successor set of one state: base pattern plus every combination of the
// nodes whose next value is genuinely random (0 < q < 1). Distributions
// within rounding error of 0 or 1 count as deterministic, matching
// transition_support, so float accumulation cannot add spurious edges.
inline void state_successors(const PBNSpec& spec, std::uint32_t s,
                             std::vector<std::uint32_t>& out) {
    constexpr double kRoundoff = 1e-12;
    out.clear();
    std::uint32_t base = 0;
    std::vector<int> free_bits;
    const NetworkState state(s, spec.n);
    for (int i = 0; i < spec.n; ++i) {
        const double q = node_next_distribution(spec, state, i);
        if (q >= 1.0 - kRoundoff)
            base |= (1u << i);
        else if (q > kRoundoff)
            free_bits.push_back(i);
    }
    const std::size_t combos = std::size_t{1} << free_bits.size();
    out.reserve(combos);
    for (std::size_t m = 0; m < combos; ++m) {
        std::uint32_t succ = base;
        for (std::size_t j = 0; j < free_bits.size(); ++j)
            if ((m >> j) & 1) succ |= (1u << free_bits[j]);
        out.push_back(succ);
    }
    std::sort(out.begin(), out.end());
}

}  // namespace detail

inline StateTransitionGraph build_stg(const PBNSpec& spec, int node_limit = kDefaultStgNodeLimit) {
    if (spec.n > node_limit)
        throw std::runtime_error("network too large for exact STG (n=" + std::to_string(spec.n) +
                                 ", limit " + std::to_string(node_limit) + ")");
    const std::size_t num_states = std::size_t{1} << spec.n;
    StateTransitionGraph g;
    g.n = spec.n;
    g.offsets.assign(num_states + 1, 0);

    std::vector<std::uint32_t> succ;
    for (std::size_t s = 0; s < num_states; ++s) {
        detail::state_successors(spec, static_cast<std::uint32_t>(s), succ);
        g.offsets[s + 1] = g.offsets[s] + succ.size();
    }
    g.targets.resize(g.offsets[num_states]);
    for (std::size_t s = 0; s < num_states; ++s) {
        detail::state_successors(spec, static_cast<std::uint32_t>(s), succ);
        std::copy(succ.begin(), succ.end(), g.targets.begin() + static_cast<std::ptrdiff_t>(g.offsets[s]));
    }
    return g;
}

// Terminal strongly-connected components of the STG, i.e. the attractors.
// Iterative Tarjan; result ordered by smallest member state.
inline std::vector<AttractorSet> terminal_sccs(const StateTransitionGraph& g) {
    const std::size_t num_states = g.num_states();
    constexpr std::uint32_t kUnvisited = 0xFFFFFFFFu;
    std::vector<std::uint32_t> index(num_states, kUnvisited);
    std::vector<std::uint32_t> lowlink(num_states, 0);
    std::vector<std::uint8_t> on_stack(num_states, 0);
    std::vector<std::int32_t> comp(num_states, -1);
    std::vector<std::uint32_t> stack;
    std::uint32_t next_index = 0;
    std::int32_t num_comps = 0;

    struct Frame {
        std::uint32_t v;
        std::uint64_t edge;
    };
    std::vector<Frame> call_stack;
    std::vector<std::vector<std::uint32_t>> components;

    for (std::size_t root = 0; root < num_states; ++root) {
        if (index[root] != kUnvisited) continue;
        call_stack.push_back({static_cast<std::uint32_t>(root), g.offsets[root]});
        index[root] = lowlink[root] = next_index++;
        stack.push_back(static_cast<std::uint32_t>(root));
        on_stack[root] = 1;
        while (!call_stack.empty()) {
            Frame& f = call_stack.back();
            if (f.edge < g.offsets[f.v + 1]) {
                const std::uint32_t w = g.targets[f.edge++];
                if (index[w] == kUnvisited) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call_stack.push_back({w, g.offsets[w]});
                } else if (on_stack[w]) {
                    lowlink[f.v] = std::min(lowlink[f.v], index[w]);
                }
            } else {
                const std::uint32_t v = f.v;
                call_stack.pop_back();
                if (!call_stack.empty())
                    lowlink[call_stack.back().v] = std::min(lowlink[call_stack.back().v], lowlink[v]);
                if (lowlink[v] == index[v]) {
                    std::vector<std::uint32_t> members;
                    std::uint32_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = num_comps;
                        members.push_back(w);
                    } while (w != v);
                    components.push_back(std::move(members));
                    ++num_comps;
                }
            }
        }
    }

    // A component is terminal when no member has an edge leaving it.
    std::vector<std::uint8_t> terminal(components.size(), 1);
    for (std::size_t s = 0; s < num_states; ++s) {
        const auto c = comp[s];
        auto [first, last] = g.successors(static_cast<std::uint32_t>(s));
        for (const std::uint32_t* p = first; p != last; ++p)
            if (comp[*p] != c) {
                terminal[static_cast<std::size_t>(c)] = 0;
                break;
            }
    }

    std::vector<AttractorSet> result;
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (!terminal[c]) continue;
        AttractorSet a;
        a.states = std::move(components[c]);
        std::sort(a.states.begin(), a.states.end());
        result.push_back(std::move(a));
    }
    std::sort(result.begin(), result.end(),
              [](const AttractorSet& a, const AttractorSet& b) { return a.states[0] < b.states[0]; });
    for (std::size_t i = 0; i < result.size(); ++i) result[i].id = static_cast<int>(i);
    return result;
}

// Unique containing attractor of s, if any. Attractors are disjoint SCCs.
inline std::optional<int> membership(const NetworkState& s,
                                     const std::vector<AttractorSet>& attractors) {
    for (const AttractorSet& a : attractors)
        if (a.contains(s.bits)) return a.id;
    return std::nullopt;
}

struct FrequencyReport {
    std::vector<double> frequency;  // per attractor, hit count / episodes
    double timeout_fraction = 0.0;
};

inline constexpr int kDefaultFrequencyRollouts = 100000;
inline constexpr int kDefaultFrequencyMaxSteps = 1000;

// Monte Carlo estimate of how often natural evolution from a uniform random
// state first absorbs into each attractor.
inline FrequencyReport estimate_attractor_frequencies(const PBNSpec& spec,
                                                      const std::vector<AttractorSet>& attractors,
                                                      int episodes, int max_steps,
                                                      std::mt19937_64& rng) {
    if (attractors.empty()) throw std::invalid_argument("no attractors given");
    std::vector<std::int64_t> hits(attractors.size(), 0);
    std::int64_t timeouts = 0;
    std::uniform_int_distribution<std::uint32_t> uniform_state(
        0, static_cast<std::uint32_t>((std::uint64_t{1} << spec.n) - 1));
    for (int ep = 0; ep < episodes; ++ep) {
        NetworkState s(uniform_state(rng), spec.n);
        bool absorbed = false;
        for (int step = 0; step <= max_steps; ++step) {
            if (auto idx = membership(s, attractors)) {
                ++hits[static_cast<std::size_t>(*idx)];
                absorbed = true;
                break;
            }
            if (step == max_steps) break;
            s = step_natural(spec, s, rng);
        }
        if (!absorbed) ++timeouts;
    }
    FrequencyReport report;
    report.frequency.resize(attractors.size());
    for (std::size_t i = 0; i < attractors.size(); ++i)
        report.frequency[i] = static_cast<double>(hits[i]) / episodes;
    report.timeout_fraction = static_cast<double>(timeouts) / episodes;
    return report;
}

// Suggested control target: the attractor occurring with the least natural
// frequency, ties broken by smallest member state (the sort order).
inline int least_frequent_attractor(const FrequencyReport& report) {
    int best = 0;
    for (std::size_t i = 1; i < report.frequency.size(); ++i)
        if (report.frequency[i] < report.frequency[static_cast<std::size_t>(best)])
            best = static_cast<int>(i);
    return best;
}

}  // namespace pbn
