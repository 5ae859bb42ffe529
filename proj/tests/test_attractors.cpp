#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pbn/attractors.hpp"
#include "pbn/dynamics.hpp"
#include "pbn/spec.hpp"

using namespace pbn;

namespace {

BooleanFunction named(const std::string& name, int t, double p) {
    return {detail::named_table(name, t), p};
}

PBNSpec identity_1node() {
    PBNSpec spec;
    spec.n = 1;
    spec.nodes.push_back({{0}, {named("OR", 1, 1.0)}});
    return spec;
}

PBNSpec random_small_spec(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> node_pick(0, n - 1);
    std::uniform_int_distribution<int> t_pick(1, std::min(3, n));
    std::uniform_int_distribution<int> l_pick(1, 3);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    std::uniform_int_distribution<int> bit(0, 1);
    PBNSpec spec;
    spec.n = n;
    for (int i = 0; i < n; ++i) {
        NodeSpec node;
        const int t = t_pick(rng);
        for (int j = 0; j < t; ++j) node.inputs.push_back(node_pick(rng));
        const int l = l_pick(rng);
        std::vector<double> w(static_cast<std::size_t>(l));
        double sum = 0.0;
        for (auto& v : w) sum += (v = unit(rng));
        for (int f = 0; f < l; ++f) {
            BooleanFunction fn;
            fn.p = w[static_cast<std::size_t>(f)] / sum;
            for (int e = 0; e < (1 << t); ++e)
                fn.table.push_back(static_cast<std::uint8_t>(bit(rng)));
            node.functions.push_back(fn);
        }
        spec.nodes.push_back(node);
    }
    return spec;
}

}  // namespace

TEST_CASE("1-node identity network: self loops and two singleton attractors") {
    const PBNSpec spec = identity_1node();
    const auto g = build_stg(spec);
    REQUIRE(g.num_states() == 2);
    auto [s0, e0] = g.successors(0);
    auto [s1, e1] = g.successors(1);
    REQUIRE(e0 - s0 == 1);
    REQUIRE(e1 - s1 == 1);
    CHECK(*s0 == 0);
    CHECK(*s1 == 1);
    const auto attractors = terminal_sccs(g);
    REQUIRE(attractors.size() == 2);
    CHECK(attractors[0].states == std::vector<std::uint32_t>{0});
    CHECK(attractors[1].states == std::vector<std::uint32_t>{1});
}

TEST_CASE("deterministic networks have out-degree one everywhere") {
    std::mt19937_64 rng(21);
    PBNSpec spec = random_small_spec(5, rng);
    for (auto& node : spec.nodes) {
        node.functions.resize(1);
        node.functions[0].p = 1.0;
    }
    const auto g = build_stg(spec);
    for (std::uint32_t s = 0; s < g.num_states(); ++s) {
        auto [first, last] = g.successors(s);
        CHECK(last - first == 1);
    }
}

TEST_CASE("STG edges equal the transition_support states") {
    std::mt19937_64 rng(33);
    const PBNSpec spec = random_small_spec(3, rng);
    const auto g = build_stg(spec);
    for (std::uint32_t s = 0; s < g.num_states(); ++s) {
        const auto support = transition_support(spec, NetworkState(s, spec.n));
        std::set<std::uint32_t> expected;
        for (const auto& st : support.states) expected.insert(st.bits);
        auto [first, last] = g.successors(s);
        std::set<std::uint32_t> actual(first, last);
        CHECK(actual == expected);
    }
}

TEST_CASE("AND-AND 2-node network has attractors 00 and 11") {
    PBNSpec spec;
    spec.n = 2;
    spec.nodes.push_back({{0, 1}, {named("AND", 2, 1.0)}});
    spec.nodes.push_back({{0, 1}, {named("AND", 2, 1.0)}});
    const auto attractors = terminal_sccs(build_stg(spec));
    REQUIRE(attractors.size() == 2);
    CHECK(attractors[0].states == std::vector<std::uint32_t>{0b00});
    CHECK(attractors[1].states == std::vector<std::uint32_t>{0b11});
}

TEST_CASE("adding an escape edge removes a purported attractor") {
    // identity 1-node graph, then point state 1 at state 0 as well
    StateTransitionGraph g;
    g.n = 1;
    g.offsets = {0, 1, 2};
    g.targets = {0, 1};
    CHECK(terminal_sccs(g).size() == 2);
    StateTransitionGraph g2;
    g2.n = 1;
    g2.offsets = {0, 1, 3};
    g2.targets = {0, 0, 1};
    const auto attractors = terminal_sccs(g2);
    REQUIRE(attractors.size() == 1);
    CHECK(attractors[0].states == std::vector<std::uint32_t>{0});
}

TEST_CASE("terminal SCCs are closed and irreducible, and absorb rollouts") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 5;
        const PBNSpec spec = random_small_spec(n, rng);
        const auto g = build_stg(spec);
        const auto attractors = terminal_sccs(g);
        REQUIRE(!attractors.empty());
        for (const auto& a : attractors) {
            for (std::uint32_t s : a.states) {
                auto [first, last] = g.successors(s);
                for (const std::uint32_t* p = first; p != last; ++p)
                    CHECK(a.contains(*p));  // closure
            }
            // irreducibility: BFS within the set from the first member reaches all
            std::set<std::uint32_t> seen{a.states[0]};
            std::vector<std::uint32_t> queue{a.states[0]};
            while (!queue.empty()) {
                const std::uint32_t v = queue.back();
                queue.pop_back();
                auto [first, last] = g.successors(v);
                for (const std::uint32_t* p = first; p != last; ++p)
                    if (a.contains(*p) && seen.insert(*p).second) queue.push_back(*p);
            }
            CHECK(seen.size() == a.states.size());
        }
        // long rollouts all end inside a detected attractor
        for (int ep = 0; ep < 200; ++ep) {
            NetworkState s(static_cast<std::uint32_t>(rng() & ((1u << n) - 1)), n);
            for (int step = 0; step < 1000; ++step) s = step_natural(spec, s, rng);
            CHECK(membership(s, attractors).has_value());
        }
    }
}

TEST_CASE("membership finds the unique containing attractor") {
    const PBNSpec spec = identity_1node();
    const auto attractors = terminal_sccs(build_stg(spec));
    CHECK(membership(NetworkState(0, 1), attractors) == 0);
    CHECK(membership(NetworkState(1, 1), attractors) == 1);
    // disjointness: each state in at most one attractor
    std::set<std::uint32_t> all;
    for (const auto& a : attractors)
        for (std::uint32_t s : a.states) CHECK(all.insert(s).second);
}

TEST_CASE("frequencies plus timeouts account for every episode") {
    std::mt19937_64 rng(3);
    const PBNSpec spec = random_small_spec(4, rng);
    const auto attractors = terminal_sccs(build_stg(spec));
    const auto report = estimate_attractor_frequencies(spec, attractors, 2000, 100, rng);
    double total = report.timeout_fraction;
    for (double f : report.frequency) total += f;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("single-attractor deterministic network absorbs every episode") {
    // g1' = g1 AND g2, g2' = 0: every state funnels into {00}
    PBNSpec spec;
    spec.n = 2;
    spec.nodes.push_back({{0, 1}, {named("AND", 2, 1.0)}});
    spec.nodes.push_back({{0}, {BooleanFunction{{0, 0}, 1.0}}});
    const auto attractors = terminal_sccs(build_stg(spec));
    REQUIRE(attractors.size() == 1);
    std::mt19937_64 rng(8);
    const auto report = estimate_attractor_frequencies(spec, attractors, 1000, 100, rng);
    CHECK(report.frequency[0] == doctest::Approx(1.0));
    CHECK(report.timeout_fraction == 0.0);
}

TEST_CASE("node limit enforced") {
    std::mt19937_64 rng(1);
    const PBNSpec spec = random_small_spec(5, rng);
    CHECK_THROWS(build_stg(spec, 4));
}
