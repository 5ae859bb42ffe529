#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "pbn/state.hpp"

namespace pbn {

struct Experience {
    NetworkState s;
    int a = 0;
    double r = 0.0;
    NetworkState s_next;
    bool terminal = false;
};

// Flat-array segment tree: leaves hold sampling weights, internal nodes the
// sum of their children. Root at 1, leaves at [capacity, 2*capacity).
class SumTree {
   public:
    explicit SumTree(std::size_t capacity) : capacity_(capacity), tree_(2 * capacity, 0.0) {}

    std::size_t capacity() const { return capacity_; }
    double total() const { return tree_[1]; }
    double leaf(std::size_t i) const { return tree_[capacity_ + i]; }

    void update(std::size_t i, double value) {
        std::size_t node = capacity_ + i;
        tree_[node] = value;
        for (node /= 2; node >= 1; node /= 2)
            tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    }

    // Prefix-sum descent: returns the leaf whose cumulative interval
    // contains query, query in [0, total()).
    std::size_t find(double query) const {
        std::size_t node = 1;
        while (node < capacity_) {
            const double left = tree_[2 * node];
            if (query < left) {
                node = 2 * node;
            } else {
                query -= left;
                node = 2 * node + 1;
            }
        }
        return node - capacity_;
    }

   private:
    std::size_t capacity_;
    std::vector<double> tree_;
};

// Same layout as SumTree but internal nodes hold the max of their children;
// gives the exact current maximum priority in O(1) with O(log N) updates.
class MaxTree {
   public:
    explicit MaxTree(std::size_t capacity) : capacity_(capacity), tree_(2 * capacity, 0.0) {}

    double max() const { return tree_[1]; }

    void update(std::size_t i, double value) {
        std::size_t node = capacity_ + i;
        tree_[node] = value;
        for (node /= 2; node >= 1; node /= 2)
            tree_[node] = std::max(tree_[2 * node], tree_[2 * node + 1]);
    }

   private:
    std::size_t capacity_;
    std::vector<double> tree_;
};

inline constexpr double kDefaultBeta0 = 0.4;
inline constexpr double kDefaultPriorityConstant = 1e-5;

// Linear anneal from beta_0 at iteration 0 to 1.0 at iteration = total.
inline double anneal_beta(long iteration, long total, double beta0 = kDefaultBeta0) {
    if (total <= 0) return 1.0;
    const double t = std::clamp(static_cast<double>(iteration) / static_cast<double>(total), 0.0, 1.0);
    return beta0 + (1.0 - beta0) * t;
}

enum class PriorityMode { kSquaredLoss, kAbsTdError };

struct SampleBatch {
    std::vector<std::size_t> indices;
    std::vector<Experience> experiences;
    std::vector<double> weights;  // max-normalized importance weights
};

// Proportional prioritized replay: ring buffer of experiences plus a sum
// tree over priority^alpha. New entries enter at the current max priority.
class ReplayBuffer {
   public:
    explicit ReplayBuffer(std::size_t capacity, double priority_constant = kDefaultPriorityConstant,
                          PriorityMode mode = PriorityMode::kSquaredLoss)
        : capacity_(capacity),
          priority_constant_(priority_constant),
          mode_(mode),
          priorities_(capacity, 0.0),
          tree_(capacity),
          max_tree_(capacity) {
        if (capacity == 0) throw std::invalid_argument("capacity must be positive");
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    PriorityMode priority_mode() const { return mode_; }
    const SumTree& tree() const { return tree_; }
    const Experience& at(std::size_t i) const { return storage_[i]; }

    std::size_t push(const Experience& e) {
        const std::size_t index = cursor_;
        if (storage_.size() < capacity_)
            storage_.push_back(e);
        else
            storage_[index] = e;
        cursor_ = (cursor_ + 1) % capacity_;
        size_ = std::max(size_, index + 1);
        max_tree_.update(index, 0.0);  // evicted entry no longer counts
        set_priority(index, std::max(1.0, max_tree_.max()));
        return index;
    }

    SampleBatch sample(std::size_t batch, double alpha, double beta, std::mt19937_64& rng) {
        if (size_ < batch || batch == 0)
            throw std::invalid_argument("buffer holds fewer experiences than the batch size");
        ensure_alpha(alpha);
        SampleBatch out;
        out.indices.reserve(batch);
        out.experiences.reserve(batch);
        out.weights.reserve(batch);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double total = tree_.total();
        double max_weight = 0.0;
        for (std::size_t k = 0; k < batch; ++k) {
            const std::size_t i = tree_.find(unit(rng) * total);
            const double prob = tree_.leaf(i) / total;
            const double w = std::pow(1.0 / (static_cast<double>(size_) * prob), beta);
            out.indices.push_back(i);
            out.experiences.push_back(storage_[i]);
            out.weights.push_back(w);
            max_weight = std::max(max_weight, w);
        }
        for (double& w : out.weights) w /= max_weight;
        return out;
    }

    // Priority p_i = L_i + c with L_i the per-sample loss (or |delta| in
    // the alternate mode; callers then pass |delta| directly).
    void update_priorities(const std::vector<std::size_t>& indices,
                           const std::vector<double>& losses) {
        if (indices.size() != losses.size())
            throw std::invalid_argument("indices/losses length mismatch");
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (indices[k] >= size_) throw std::out_of_range("priority index out of range");
            if (losses[k] < 0.0) throw std::invalid_argument("loss must be non-negative");
            set_priority(indices[k], losses[k] + priority_constant_);
        }
    }

   private:
    void set_priority(std::size_t index, double priority) {
        priorities_[index] = priority;
        max_tree_.update(index, priority);
        tree_.update(index, std::pow(priority, alpha_));
    }

    void ensure_alpha(double alpha) {
        if (alpha == alpha_) return;
        alpha_ = alpha;
        for (std::size_t i = 0; i < size_; ++i) tree_.update(i, std::pow(priorities_[i], alpha_));
    }

    std::size_t capacity_;
    double priority_constant_;
    PriorityMode mode_;
    double alpha_ = 1.0;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
    std::vector<Experience> storage_;
    std::vector<double> priorities_;
    SumTree tree_;
    MaxTree max_tree_;
};

}  // namespace pbn
