#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbn/spec.hpp"

namespace pbn {

struct ExpressionMatrix {
    std::vector<std::string> genes;
    std::vector<std::vector<double>> samples;  // rows, each of length genes.size()

    int num_genes() const { return static_cast<int>(genes.size()); }
    int num_samples() const { return static_cast<int>(samples.size()); }
};

struct InferError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV: first row gene names, subsequent rows real-valued samples.
inline ExpressionMatrix load_expression_csv(std::istream& in) {
    ExpressionMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw InferError("empty expression file");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) m.genes.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() != m.genes.size())
            throw InferError("sample row has " + std::to_string(values.size()) +
                             " values, expected " + std::to_string(m.genes.size()));
        m.samples.push_back(std::move(values));
    }
    if (m.num_samples() < 2) throw InferError("need at least 2 samples");
    return m;
}

struct BinaryMatrix {
    std::vector<std::string> genes;
    std::vector<std::vector<std::uint8_t>> samples;
    std::vector<std::string> warnings;

    std::vector<std::uint8_t> column(int g) const {
        std::vector<std::uint8_t> col;
        col.reserve(samples.size());
        for (const auto& row : samples) col.push_back(row[static_cast<std::size_t>(g)]);
        return col;
    }
};

// Per-gene median quantization: value >= median -> 1. Even sample counts use
// the mean of the two middle order statistics.
inline BinaryMatrix median_quantize(const ExpressionMatrix& m) {
    BinaryMatrix out;
    out.genes = m.genes;
    out.samples.assign(static_cast<std::size_t>(m.num_samples()),
                       std::vector<std::uint8_t>(static_cast<std::size_t>(m.num_genes()), 0));
    for (int g = 0; g < m.num_genes(); ++g) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(m.num_samples()));
        for (const auto& row : m.samples) values.push_back(row[static_cast<std::size_t>(g)]);
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t k = sorted.size();
        const double median =
            (k % 2 == 1) ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
        if (sorted.front() == sorted.back())
            out.warnings.push_back("gene " + m.genes[static_cast<std::size_t>(g)] +
                                   " is constant; quantizes to all ones");
        for (int s = 0; s < m.num_samples(); ++s)
            out.samples[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)] =
                values[static_cast<std::size_t>(s)] >= median ? 1 : 0;
    }
    return out;
}

struct FittedFunction {
    std::vector<std::uint8_t> table;
    double error = 0.0;  // fraction of samples misclassified
};

// Majority-vote table over the observed input patterns: the resubstitution-
// optimal boolean predictor. Ties and unseen patterns resolve to 0.
inline FittedFunction fit_function(const std::vector<std::uint8_t>& target,
                                   const std::vector<std::vector<std::uint8_t>>& predictors) {
    if (predictors.empty()) throw InferError("need at least one predictor column");
    const std::size_t num_samples = target.size();
    const std::size_t entries = std::size_t{1} << predictors.size();
    std::vector<long> ones(entries, 0), total(entries, 0);
    for (std::size_t s = 0; s < num_samples; ++s) {
        std::size_t pattern = 0;
        for (std::size_t k = 0; k < predictors.size(); ++k)
            if (predictors[k][s]) pattern |= (std::size_t{1} << k);
        ++total[pattern];
        if (target[s]) ++ones[pattern];
    }
    FittedFunction fit;
    fit.table.assign(entries, 0);
    long errors = 0;
    for (std::size_t p = 0; p < entries; ++p) {
        if (2 * ones[p] > total[p]) fit.table[p] = 1;
        errors += fit.table[p] ? total[p] - ones[p] : ones[p];
    }
    fit.error = static_cast<double>(errors) / static_cast<double>(num_samples);
    return fit;
}

// COD = (e0 - e) / e0 with e0 the majority-class error; 0 when e0 = 0.
inline double cod(const std::vector<std::uint8_t>& target,
                  const std::vector<std::vector<std::uint8_t>>& predictors) {
    long ones = 0;
    for (std::uint8_t v : target) ones += v;
    const long zeros = static_cast<long>(target.size()) - ones;
    const double e0 =
        static_cast<double>(std::min(ones, zeros)) / static_cast<double>(target.size());
    if (e0 == 0.0) return 0.0;
    const double e = fit_function(target, predictors).error;
    return (e0 - e) / e0;
}

struct PredictorScore {
    int target_gene = 0;
    std::vector<int> predictors;  // ascending gene indices
    std::vector<std::uint8_t> table;
    double cod = 0.0;
};

namespace detail {

inline void k_subsets(int n, int k, bool allow_self, int self,
                      std::vector<std::vector<int>>& out) {
    std::vector<int> current;
    auto rec = [&](auto&& rec, int start) -> void {
        if (static_cast<int>(current.size()) == k) {
            out.push_back(current);
            return;
        }
        for (int i = start; i < n; ++i) {
            if (!allow_self && i == self) continue;
            current.push_back(i);
            rec(rec, i + 1);
            current.pop_back();
        }
    };
    rec(rec, 0);
}

}  // namespace detail

// Score every K-subset of genes as a predictor set for one target gene.
inline std::vector<PredictorScore> score_predictors(const BinaryMatrix& data, int target_gene,
                                                    int k, bool allow_self = true) {
    std::vector<std::vector<int>> subsets;
    detail::k_subsets(data.genes.size() ? static_cast<int>(data.genes.size()) : 0, k, allow_self,
                      target_gene, subsets);
    const std::vector<std::uint8_t> target = data.column(target_gene);
    std::vector<PredictorScore> scores;
    scores.reserve(subsets.size());
    for (const auto& subset : subsets) {
        std::vector<std::vector<std::uint8_t>> cols;
        cols.reserve(subset.size());
        for (int g : subset) cols.push_back(data.column(g));
        PredictorScore sc;
        sc.target_gene = target_gene;
        sc.predictors = subset;
        const FittedFunction fit = fit_function(target, cols);
        sc.table = fit.table;
        sc.cod = cod(target, cols);
        scores.push_back(std::move(sc));
    }
    return scores;
}

// Melanoma-style pipeline: keep the `top` highest-COD predictor sets per
// gene (ties by lexicographic predictor indices), probability proportional
// to COD after dropping non-positive scores.
inline PBNSpec infer_pbn(const BinaryMatrix& data, int k = 3, int top = 10,
                         bool allow_self = true) {
    const int n = static_cast<int>(data.genes.size());
    PBNSpec spec;
    spec.n = n;
    for (int g = 0; g < n; ++g) {
        std::vector<PredictorScore> scores = score_predictors(data, g, k, allow_self);
        std::stable_sort(scores.begin(), scores.end(),
                         [](const PredictorScore& a, const PredictorScore& b) {
                             if (a.cod != b.cod) return a.cod > b.cod;
                             return a.predictors < b.predictors;
                         });
        if (static_cast<int>(scores.size()) > top) scores.resize(static_cast<std::size_t>(top));
        std::erase_if(scores, [](const PredictorScore& s) { return s.cod <= 0.0; });
        if (scores.empty())
            throw InferError("no predictor set with positive COD for gene " +
                             data.genes[static_cast<std::size_t>(g)]);
        double cod_sum = 0.0;
        for (const auto& s : scores) cod_sum += s.cod;
        NodeSpec node;
        // All kept sets share one wiring only if identical; a PBN node has a
        // single input list, so each kept set becomes a function over the
        // union wiring with its table lifted accordingly.
        std::vector<int> wiring;
        for (const auto& s : scores)
            for (int p : s.predictors)
                if (std::find(wiring.begin(), wiring.end(), p) == wiring.end()) wiring.push_back(p);
        std::sort(wiring.begin(), wiring.end());
        if (wiring.size() > 20)
            throw InferError("union wiring of kept predictor sets exceeds 20 inputs for gene " +
                             data.genes[static_cast<std::size_t>(g)]);
        node.inputs = wiring;
        const std::size_t lifted_entries = std::size_t{1} << wiring.size();
        for (const auto& s : scores) {
            BooleanFunction fn;
            fn.p = s.cod / cod_sum;
            fn.table.assign(lifted_entries, 0);
            for (std::size_t pattern = 0; pattern < lifted_entries; ++pattern) {
                std::size_t sub = 0;
                for (std::size_t j = 0; j < s.predictors.size(); ++j) {
                    const auto pos = static_cast<std::size_t>(
                        std::find(wiring.begin(), wiring.end(), s.predictors[j]) - wiring.begin());
                    if ((pattern >> pos) & 1) sub |= (std::size_t{1} << j);
                }
                fn.table[pattern] = s.table[sub];
            }
            node.functions.push_back(std::move(fn));
        }
        spec.nodes.push_back(std::move(node));
    }
    validate_spec(spec);
    return spec;
}

}  // namespace pbn
