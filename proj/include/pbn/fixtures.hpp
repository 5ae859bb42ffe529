#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pbn/infer.hpp"
#include "pbn/spec.hpp"

namespace pbn::fixtures {

// Per-node (OR, AND, XOR) selection probabilities for the two synthetic
// networks; zero means the function is absent from the node's set.
inline const std::vector<std::array<double, 3>>& pbn10_function_probabilities() {
    static const std::vector<std::array<double, 3>> table = {
        {1.00, 0.00, 0.00}, {0.50, 0.25, 0.25}, {0.71, 0.29, 0.00}, {0.52, 0.48, 0.00},
        {0.36, 0.05, 0.59}, {0.82, 0.15, 0.03}, {0.48, 0.52, 0.00}, {0.28, 0.45, 0.27},
        {1.00, 0.00, 0.00}, {0.99, 0.01, 0.00},
    };
    return table;
}

inline const std::vector<std::array<double, 3>>& pbn20_function_probabilities() {
    static const std::vector<std::array<double, 3>> table = {
        {0.39, 0.04, 0.57}, {0.70, 0.00, 0.30}, {1.00, 0.00, 0.00}, {0.18, 0.82, 0.00},
        {0.00, 0.11, 0.89}, {1.00, 0.00, 0.00}, {1.00, 0.00, 0.00}, {0.00, 0.44, 0.56},
        {0.00, 0.00, 1.00}, {0.82, 0.09, 0.09}, {0.00, 1.00, 0.00}, {0.00, 1.00, 0.00},
        {1.00, 0.00, 0.00}, {0.01, 0.98, 0.01}, {0.00, 0.00, 1.00}, {0.00, 1.00, 0.00},
        {1.00, 0.00, 0.00}, {0.00, 1.00, 0.00}, {0.00, 0.00, 1.00}, {1.00, 0.00, 0.00},
    };
    return table;
}

inline constexpr int kFixturePredictors = 3;  // T = 3 inputs per node
inline constexpr std::uint64_t kPbn10WiringSeed = 79;
inline constexpr std::uint64_t kPbn20WiringSeed = 47;

// Build a synthetic PBN: fixed per-node function sets with random
// T-input wiring drawn from the given seed (distinct inputs per node).
inline PBNSpec synthetic_pbn(const std::vector<std::array<double, 3>>& probabilities,
                             std::uint64_t wiring_seed, int t = kFixturePredictors) {
    const int n = static_cast<int>(probabilities.size());
    std::mt19937_64 rng(wiring_seed);
    PBNSpec spec;
    spec.n = n;
    static const char* kNames[3] = {"OR", "AND", "XOR"};
    for (int i = 0; i < n; ++i) {
        NodeSpec node;
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) pool[static_cast<std::size_t>(j)] = j;
        for (int j = 0; j < t; ++j) {
            std::uniform_int_distribution<int> pick(j, n - 1);
            std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
            node.inputs.push_back(pool[static_cast<std::size_t>(j)]);
        }
        for (int f = 0; f < 3; ++f) {
            const double p = probabilities[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
            if (p <= 0.0) continue;
            BooleanFunction fn;
            fn.p = p;
            fn.table = detail::named_table(kNames[f], t);
            node.functions.push_back(std::move(fn));
        }
        spec.nodes.push_back(std::move(node));
    }
    validate_spec(spec);
    return spec;
}

inline PBNSpec pbn10_spec() {
    return synthetic_pbn(pbn10_function_probabilities(), kPbn10WiringSeed);
}

inline PBNSpec pbn20_spec() {
    return synthetic_pbn(pbn20_function_probabilities(), kPbn20WiringSeed);
}

// ---------------------------------------------------------------------------
// Melanoma-style 7-gene fixture. Genes 0..2 vary freely; genes 3..6 follow
// fixed boolean functions of (g0, g1, g2), so the true predictor set of every
// gene is {0, 1, 2} and attains COD 1 on the generated data.

inline const std::vector<std::string>& melanoma_genes() {
    static const std::vector<std::string> names = {"pirin", "WNT5A", "S100P", "RET1",
                                                   "MART1", "HADHB", "STC2"};
    return names;
}

// Truth tables over (g0, g1, g2), g0 = LSB. Each table is balanced (four ones
// in eight patterns) so the column median of the generated expression matrix
// falls strictly between the two expression levels and quantization is exact.
// This particular combination keeps the inferred network steerable: from any
// non-target start, an optimal controller reaches the rarest attractor within
// a 7-step horizon with probability > 0.99.
inline const std::vector<std::vector<std::uint8_t>>& melanoma_derived_tables() {
    static const std::vector<std::vector<std::uint8_t>> tables = {
        {1, 0, 1, 0, 1, 0, 1, 0},  // RET1: not g0
        {0, 0, 1, 1, 0, 1, 1, 0},  // MART1
        {0, 0, 1, 1, 1, 0, 1, 0},  // HADHB
        {1, 1, 0, 1, 0, 1, 0, 0},  // STC2
    };
    return tables;
}

inline constexpr int kMelanomaReplicates = 4;

// Continuous expression matrix: two well-separated levels per gene so median
// quantization recovers the binary pattern exactly.
inline ExpressionMatrix melanoma_expression() {
    ExpressionMatrix m;
    m.genes = melanoma_genes();
    const auto& derived = melanoma_derived_tables();
    for (int rep = 0; rep < kMelanomaReplicates; ++rep) {
        for (int pattern = 0; pattern < 8; ++pattern) {
            std::vector<std::uint8_t> bits(7, 0);
            for (int g = 0; g < 3; ++g) bits[static_cast<std::size_t>(g)] = (pattern >> g) & 1;
            for (int g = 3; g < 7; ++g)
                bits[static_cast<std::size_t>(g)] =
                    derived[static_cast<std::size_t>(g - 3)][static_cast<std::size_t>(pattern)];
            std::vector<double> row(7);
            for (int g = 0; g < 7; ++g) {
                const double lo = 1.0 + 0.1 * g;
                const double hi = 5.0 + 0.1 * g;
                row[static_cast<std::size_t>(g)] = bits[static_cast<std::size_t>(g)] ? hi : lo;
            }
            m.samples.push_back(std::move(row));
        }
    }
    return m;
}

inline std::string melanoma_expression_csv() {
    const ExpressionMatrix m = melanoma_expression();
    std::string out;
    for (std::size_t g = 0; g < m.genes.size(); ++g) {
        if (g) out += ',';
        out += m.genes[g];
    }
    out += '\n';
    char buf[32];
    for (const auto& row : m.samples) {
        for (std::size_t g = 0; g < row.size(); ++g) {
            if (g) out += ',';
            std::snprintf(buf, sizeof(buf), "%.1f", row[g]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace pbn::fixtures
