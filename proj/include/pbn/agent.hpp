#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "pbn/env.hpp"
#include "pbn/mlp.hpp"
#include "pbn/replay.hpp"

namespace pbn {

struct TrainConfig {
    long iterations = 300000;
    int horizon = 11;
    double success_reward = 5.0;
    std::size_t buffer_capacity = 1024;
    double gamma = 0.95;
    long sync_period = 500;
    std::size_t batch_size = 128;
    double learning_rate = 1e-4;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_fraction = 0.8;  // fraction of iterations spent decaying
    double alpha = 0.6;
    double beta0 = 0.4;
    double priority_constant = 1e-5;
    PriorityMode priority_mode = PriorityMode::kSquaredLoss;
    int hidden_units = kDefaultHiddenUnits;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
        if (sync_period < 1) throw std::invalid_argument("sync period must be >= 1");
        if (iterations < static_cast<long>(batch_size))
            throw std::invalid_argument("iterations must be >= batch size");
        if (!(success_reward > 2.0)) throw std::invalid_argument("success reward must be > 2");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    }

    double epsilon_at(long iteration) const {
        const double span = eps_decay_fraction * static_cast<double>(iterations);
        if (span <= 0.0) return eps_end;
        const double t = std::min(1.0, static_cast<double>(iteration) / span);
        return eps_start + (eps_end - eps_start) * t;
    }
};

inline constexpr long kEpochIterations = 5000;

struct EpochMetrics {
    int epoch = 0;
    double mean_interventions = 0.0;
    double std_interventions = 0.0;
    double success_rate = 0.0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
};

// Epsilon-greedy over Q-values; greedy ties go to the lowest index.
inline int select_action(const Vector& q, double eps, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < eps) {
        std::uniform_int_distribution<int> uniform_action(0, static_cast<int>(q.size()) - 1);
        return uniform_action(rng);
    }
    int best = 0;
    for (int a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

inline Vector state_features(const NetworkState& s) {
    Vector x(s.n);
    for (int i = 0; i < s.n; ++i) x[i] = s.get(i) ? 1.0 : 0.0;
    return x;
}

// Double Q-learning targets: the online network picks the bootstrap action,
// the frozen copy evaluates it. Terminal transitions use the bare reward.
inline Vector compute_targets(const std::vector<Experience>& batch, const QNetwork& online,
                              const QNetwork& frozen, double gamma) {
    const std::size_t m = batch.size();
    const int n = online.input_size;
    Matrix next_states(m, n);
    for (std::size_t i = 0; i < m; ++i)
        next_states.row(static_cast<Eigen::Index>(i)) = state_features(batch[i].s_next).transpose();
    const Matrix q_next_online = forward(online, next_states).y;
    const Matrix q_next_frozen = forward(frozen, next_states).y;
    Vector targets(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (batch[i].terminal) {
            targets[row] = batch[i].r;
            continue;
        }
        Eigen::Index best = 0;
        q_next_online.row(row).maxCoeff(&best);
        targets[row] = batch[i].r + gamma * q_next_frozen(row, best);
    }
    return targets;
}

// One sampled gradient update; returns the mean (unweighted) squared TD error.
inline double train_step(ReplayBuffer& buffer, QNetwork& online, const QNetwork& frozen,
                         AdamState& opt, const TrainConfig& cfg, long iteration,
                         std::mt19937_64& rng) {
    const double beta = anneal_beta(iteration, cfg.iterations, cfg.beta0);
    SampleBatch sample = buffer.sample(cfg.batch_size, cfg.alpha, beta, rng);
    const std::size_t m = sample.experiences.size();

    Matrix states(m, online.input_size);
    for (std::size_t i = 0; i < m; ++i)
        states.row(static_cast<Eigen::Index>(i)) = state_features(sample.experiences[i].s).transpose();
    const Vector targets = compute_targets(sample.experiences, online, frozen, cfg.gamma);

    ForwardCache cache = forward(online, states);
    Matrix upstream = Matrix::Zero(static_cast<Eigen::Index>(m), online.output_size);
    std::vector<double> priorities(m);
    double mean_loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const int a = sample.experiences[i].a;
        const double delta = cache.y(row, a) - targets[row];
        const double loss = delta * delta;
        mean_loss += loss;
        priorities[i] = buffer.priority_mode() == PriorityMode::kSquaredLoss ? loss : std::abs(delta);
        // d/dq of mean_i(w_i * delta_i^2)
        upstream(row, a) = sample.weights[i] * 2.0 * delta / static_cast<double>(m);
    }
    mean_loss /= static_cast<double>(m);
    if (!std::isfinite(mean_loss)) throw std::runtime_error("non-finite training loss");

    GradientSet grads = backward(online, cache, upstream);
    optimize_step(online, grads, opt, cfg.learning_rate);
    buffer.update_priorities(sample.indices, priorities);
    return mean_loss;
}

struct TrainResult {
    QNetwork network;
    std::vector<EpochMetrics> metrics;
};

// Full training run: one environment step and (after warm-up) one gradient
// update per iteration; the frozen copy refreshes every sync_period steps.
// Deterministic given (config, seed).
inline TrainResult train(const PBNSpec& spec, const ControlConfig& env_cfg, TrainConfig cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    ControlEnv env(spec, env_cfg);
    QNetwork online = init_network(spec.n, spec.n + 1, rng, cfg.hidden_units);
    QNetwork frozen = copy_params(online);
    AdamState opt = AdamState::like(online);
    ReplayBuffer buffer(cfg.buffer_capacity, cfg.priority_constant, cfg.priority_mode);

    TrainResult result;
    NetworkState s = env.reset(rng);
    int episode_steps = 0;
    std::vector<double> epoch_lengths;
    long epoch_successes = 0, epoch_episodes = 0;
    double epoch_loss = 0.0;
    long epoch_updates = 0;

    for (long it = 0; it < cfg.iterations; ++it) {
        const double eps = cfg.epsilon_at(it);
        const int action = select_action(forward_one(online, state_features(s)), eps, rng);
        const StepOutcome out = env.step(action, rng);
        ++episode_steps;

        Experience e;
        e.s = s;
        e.a = action;
        e.r = out.reward;
        e.s_next = out.next_state;
        // Horizon cuts bootstrap as non-terminal; only entering the target
        // is environmental death.
        e.terminal = (out.reason == TerminalReason::kSuccess);
        buffer.push(e);
        s = out.next_state;

        if (out.terminal) {
            epoch_lengths.push_back(static_cast<double>(episode_steps));
            ++epoch_episodes;
            if (out.reason == TerminalReason::kSuccess) ++epoch_successes;
            s = env.reset(rng);
            episode_steps = 0;
        }

        if (buffer.size() >= cfg.buffer_capacity) {
            epoch_loss += train_step(buffer, online, frozen, opt, cfg, it, rng);
            ++epoch_updates;
            if ((it + 1) % cfg.sync_period == 0) frozen = copy_params(online);
        }

        if ((it + 1) % kEpochIterations == 0) {
            EpochMetrics m;
            m.epoch = static_cast<int>((it + 1) / kEpochIterations);
            if (!epoch_lengths.empty()) {
                double mean = 0.0;
                for (double v : epoch_lengths) mean += v;
                mean /= static_cast<double>(epoch_lengths.size());
                double var = 0.0;
                for (double v : epoch_lengths) var += (v - mean) * (v - mean);
                var /= static_cast<double>(epoch_lengths.size());
                m.mean_interventions = mean;
                m.std_interventions = std::sqrt(var);
            }
            m.success_rate = epoch_episodes > 0
                                 ? static_cast<double>(epoch_successes) / static_cast<double>(epoch_episodes)
                                 : 0.0;
            m.mean_loss = epoch_updates > 0 ? epoch_loss / static_cast<double>(epoch_updates) : 0.0;
            m.epsilon = eps;
            result.metrics.push_back(m);
            if (!online.finite()) throw std::runtime_error("network parameters became non-finite");
            epoch_lengths.clear();
            epoch_successes = epoch_episodes = 0;
            epoch_loss = 0.0;
            epoch_updates = 0;
        }
    }
    result.network = std::move(online);
    return result;
}

enum class Policy { kGreedy, kRandom };

struct EvalResult {
    double success_rate = 0.0;
    double mean_interventions = 0.0;
    double std_interventions = 0.0;
    std::vector<long> length_histogram;  // index = episode length in steps
};

// Greedy (or uniform random) rollouts from fresh reset states.
inline EvalResult evaluate(const PBNSpec& spec, const ControlConfig& env_cfg, const QNetwork* net,
                           int episodes, std::mt19937_64& rng, Policy policy = Policy::kGreedy) {
    ControlEnv env(spec, env_cfg);
    std::uniform_int_distribution<int> uniform_action(0, spec.n);
    EvalResult result;
    result.length_histogram.assign(static_cast<std::size_t>(env_cfg.horizon) + 1, 0);
    std::vector<double> lengths;
    long successes = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        NetworkState s = env.reset(rng);
        StepOutcome out;
        do {
            int action;
            if (policy == Policy::kRandom || net == nullptr)
                action = uniform_action(rng);
            else
                action = select_action(forward_one(*net, state_features(s)), 0.0, rng);
            out = env.step(action, rng);
            s = out.next_state;
        } while (!out.terminal);
        lengths.push_back(static_cast<double>(env.steps_taken()));
        ++result.length_histogram[static_cast<std::size_t>(env.steps_taken())];
        if (out.reason == TerminalReason::kSuccess) ++successes;
    }
    result.success_rate = static_cast<double>(successes) / episodes;
    double mean = 0.0;
    for (double v : lengths) mean += v;
    mean /= static_cast<double>(lengths.size());
    double var = 0.0;
    for (double v : lengths) var += (v - mean) * (v - mean);
    var /= static_cast<double>(lengths.size());
    result.mean_interventions = mean;
    result.std_interventions = std::sqrt(var);
    return result;
}

struct BaselineResult {
    double mean_interventions = 0.0;
    double std_interventions = 0.0;
    long capped_episodes = 0;
};

// Uniform random interventions until the target is entered (no horizon);
// runaway episodes stop at cap and count at the cap length.
inline BaselineResult random_baseline(const PBNSpec& spec, const AttractorSet& target,
                                      int episodes, long cap, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint32_t> uniform_state(
        0, static_cast<std::uint32_t>((std::uint64_t{1} << spec.n) - 1));
    std::uniform_int_distribution<int> uniform_action(0, spec.n);
    std::vector<double> lengths;
    BaselineResult result;
    for (int ep = 0; ep < episodes; ++ep) {
        NetworkState s(uniform_state(rng), spec.n);
        while (target.contains(s.bits)) s = NetworkState(uniform_state(rng), spec.n);
        long steps = 0;
        while (steps < cap) {
            s = step_natural(spec, apply_intervention(s, uniform_action(rng)), rng);
            ++steps;
            if (target.contains(s.bits)) break;
        }
        if (steps >= cap && !target.contains(s.bits)) ++result.capped_episodes;
        lengths.push_back(static_cast<double>(steps));
    }
    double mean = 0.0;
    for (double v : lengths) mean += v;
    mean /= static_cast<double>(lengths.size());
    double var = 0.0;
    for (double v : lengths) var += (v - mean) * (v - mean);
    var /= static_cast<double>(lengths.size());
    result.mean_interventions = mean;
    result.std_interventions = std::sqrt(var);
    return result;
}

}  // namespace pbn
