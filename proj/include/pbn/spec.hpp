#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbn/state.hpp"

namespace pbn {

inline constexpr double kProbTolerance = 1e-9;

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One candidate boolean function of a node: a truth table over the node's
// T inputs plus its selection probability. Table entry j is the output for
// the input pattern whose integer value is j (first listed input = LSB).
struct BooleanFunction {
    std::vector<std::uint8_t> table;
    double p = 0.0;
};

struct NodeSpec {
    std::vector<int> inputs;
    std::vector<BooleanFunction> functions;
};

struct PBNSpec {
    int n = 0;
    std::vector<NodeSpec> nodes;
};

namespace detail {

inline std::vector<std::uint8_t> named_table(const std::string& name, int num_inputs) {
    const std::size_t entries = std::size_t{1} << num_inputs;
    std::vector<std::uint8_t> table(entries, 0);
    for (std::size_t pattern = 0; pattern < entries; ++pattern) {
        const int popcount = std::popcount(pattern);
        if (name == "OR")
            table[pattern] = popcount > 0 ? 1 : 0;
        else if (name == "AND")
            table[pattern] = popcount == num_inputs ? 1 : 0;
        else if (name == "XOR")
            table[pattern] = static_cast<std::uint8_t>(popcount & 1);
        else
            throw SpecError("unknown function name '" + name + "' (expected OR, AND or XOR)");
    }
    return table;
}

}  // namespace detail

inline void validate_spec(const PBNSpec& spec) {
    if (spec.n < 1) throw SpecError("node count must be >= 1");
    if (spec.n > 32) throw SpecError("node count exceeds the 32-node state encoding");
    if (static_cast<int>(spec.nodes.size()) != spec.n)
        throw SpecError("nodes list length does not match n");
    for (int i = 0; i < spec.n; ++i) {
        const NodeSpec& node = spec.nodes[static_cast<std::size_t>(i)];
        const std::string where = "node " + std::to_string(i) + ": ";
        if (node.inputs.empty()) throw SpecError(where + "needs at least one input");
        for (int in : node.inputs)
            if (in < 0 || in >= spec.n)
                throw SpecError(where + "input index " + std::to_string(in) + " out of range");
        if (node.functions.empty()) throw SpecError(where + "needs at least one function");
        const std::size_t expected = std::size_t{1} << node.inputs.size();
        double sum = 0.0;
        for (const BooleanFunction& f : node.functions) {
            if (f.table.size() != expected)
                throw SpecError(where + "truth table has " + std::to_string(f.table.size()) +
                                " entries, expected " + std::to_string(expected));
            for (std::uint8_t v : f.table)
                if (v > 1) throw SpecError(where + "truth table entries must be 0 or 1");
            if (!(f.p > 0.0) || f.p > 1.0)
                throw SpecError(where + "function probability must be in (0,1]");
            sum += f.p;
        }
        if (std::abs(sum - 1.0) > kProbTolerance)
            throw SpecError(where + "probabilities sum to " + std::to_string(sum));
    }
}

inline PBNSpec parse_spec(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(std::string("malformed spec document: ") + e.what());
    }
    PBNSpec spec;
    try {
        spec.n = doc.at("n").get<int>();
        for (const auto& jnode : doc.at("nodes")) {
            NodeSpec node;
            node.inputs = jnode.at("inputs").get<std::vector<int>>();
            for (const auto& jf : jnode.at("functions")) {
                BooleanFunction fn;
                fn.p = jf.at("p").get<double>();
                if (jf.contains("name")) {
                    fn.table = detail::named_table(jf.at("name").get<std::string>(),
                                                   static_cast<int>(node.inputs.size()));
                } else if (jf.contains("table")) {
                    const std::string bits = jf.at("table").get<std::string>();
                    fn.table.reserve(bits.size());
                    for (char c : bits) {
                        if (c != '0' && c != '1')
                            throw SpecError("truth table bitstring must be binary");
                        fn.table.push_back(c == '1' ? 1 : 0);
                    }
                } else {
                    throw SpecError("function needs either 'name' or 'table'");
                }
                node.functions.push_back(std::move(fn));
            }
            spec.nodes.push_back(std::move(node));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed spec document: ") + e.what());
    }
    validate_spec(spec);
    return spec;
}

inline std::string serialize_spec(const PBNSpec& spec) {
    nlohmann::json doc;
    doc["n"] = spec.n;
    doc["nodes"] = nlohmann::json::array();
    for (const NodeSpec& node : spec.nodes) {
        nlohmann::json jnode;
        jnode["inputs"] = node.inputs;
        jnode["functions"] = nlohmann::json::array();
        for (const BooleanFunction& f : node.functions) {
            std::string bits(f.table.size(), '0');
            for (std::size_t j = 0; j < f.table.size(); ++j)
                if (f.table[j]) bits[j] = '1';
            jnode["functions"].push_back({{"table", bits}, {"p", f.p}});
        }
        doc["nodes"].push_back(std::move(jnode));
    }
    return doc.dump(2) + "\n";
}

}  // namespace pbn
