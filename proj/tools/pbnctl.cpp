// pbnctl: simulate PBNs, analyze attractors, train/evaluate a DDQN
// controller, run the random-intervention baseline, and infer PBN specs
// from expression data.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbn/agent.hpp"
#include "pbn/attractors.hpp"
#include "pbn/config.hpp"
#include "pbn/dynamics.hpp"
#include "pbn/env.hpp"
#include "pbn/fixtures.hpp"
#include "pbn/infer.hpp"
#include "pbn/mlp.hpp"
#include "pbn/spec.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (const char* env = std::getenv("PBNCTL_OUT"); env && *env) return env;
    return flag_value;
}

struct TargetSelection {
    pbn::AttractorSet target;
    std::vector<pbn::AttractorSet> all;
};

// Explicit state list, or the least-frequent attractor of the exact STG.
TargetSelection select_target(const pbn::PBNSpec& spec, const pbn::RunConfig& cfg) {
    TargetSelection sel;
    const auto stg = pbn::build_stg(spec);
    sel.all = pbn::terminal_sccs(stg);
    if (!cfg.target_states.empty()) {
        sel.target.states.reserve(cfg.target_states.size());
        for (const std::string& s : cfg.target_states)
            sel.target.states.push_back(pbn::NetworkState::from_string(s).bits);
        std::sort(sel.target.states.begin(), sel.target.states.end());
        return sel;
    }
    std::mt19937_64 rng(cfg.train.seed ^ 0x9e3779b97f4a7c15ull);
    const auto freq = pbn::estimate_attractor_frequencies(
        spec, sel.all, cfg.frequency_rollouts, pbn::kDefaultFrequencyMaxSteps, rng);
    sel.target = sel.all[static_cast<std::size_t>(pbn::least_frequent_attractor(freq))];
    return sel;
}

pbn::ControlConfig make_env_config(const pbn::RunConfig& cfg, const TargetSelection& sel) {
    pbn::ControlConfig env_cfg;
    env_cfg.target = sel.target;
    env_cfg.all_attractors = sel.all;
    env_cfg.horizon = cfg.train.horizon;
    env_cfg.success_reward = cfg.train.success_reward;
    env_cfg.reward_mode = cfg.reward_mode;
    return env_cfg;
}

std::string metrics_csv(const std::vector<pbn::EpochMetrics>& metrics) {
    std::string out = "epoch,mean_interventions,std_interventions,success_rate,mean_loss,epsilon\n";
    for (const auto& m : metrics) {
        out += std::to_string(m.epoch) + ',' + format_double(m.mean_interventions) + ',' +
               format_double(m.std_interventions) + ',' + format_double(m.success_rate) + ',' +
               format_double(m.mean_loss) + ',' + format_double(m.epsilon) + '\n';
    }
    return out;
}

void write_manifest(const std::string& out_dir, const pbn::RunConfig& cfg,
                    const std::string& spec_text, const std::string& command) {
    nlohmann::json doc;
    doc["command"] = command;
    doc["spec"] = cfg.spec_path;
    doc["spec_hash"] = pbn::content_hash(spec_text);
    doc["seed"] = cfg.train.seed;
    doc["iterations"] = cfg.train.iterations;
    doc["horizon"] = cfg.train.horizon;
    doc["success_reward"] = cfg.train.success_reward;
    doc["buffer_capacity"] = cfg.train.buffer_capacity;
    doc["gamma"] = cfg.train.gamma;
    doc["sync_period"] = cfg.train.sync_period;
    doc["batch_size"] = cfg.train.batch_size;
    doc["learning_rate"] = cfg.train.learning_rate;
    doc["alpha"] = cfg.train.alpha;
    doc["beta0"] = cfg.train.beta0;
    pbn::write_file(out_dir + "/manifest.json", doc.dump(2) + "\n");
}

int cmd_simulate(const std::string& spec_path, int steps, std::uint64_t seed) {
    const pbn::PBNSpec spec = pbn::parse_spec(pbn::read_file(spec_path));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> uniform_state(
        0, static_cast<std::uint32_t>((std::uint64_t{1} << spec.n) - 1));
    pbn::NetworkState s(uniform_state(rng), spec.n);
    std::cout << s.to_string() << "\n";
    for (int i = 0; i < steps; ++i) {
        s = pbn::step_natural(spec, s, rng);
        std::cout << s.to_string() << "\n";
    }
    return 0;
}

int cmd_attractors(const std::string& spec_path, int rollouts, std::uint64_t seed) {
    const pbn::PBNSpec spec = pbn::parse_spec(pbn::read_file(spec_path));
    const auto stg = pbn::build_stg(spec);
    const auto attractors = pbn::terminal_sccs(stg);
    std::mt19937_64 rng(seed);
    const auto freq = pbn::estimate_attractor_frequencies(spec, attractors, rollouts,
                                                          pbn::kDefaultFrequencyMaxSteps, rng);
    const int suggested = pbn::least_frequent_attractor(freq);
    std::cout << "attractor_id,size,states,frequency\n";
    for (std::size_t i = 0; i < attractors.size(); ++i) {
        std::string states;
        for (std::size_t j = 0; j < attractors[i].states.size(); ++j) {
            if (j) states += ' ';
            states += pbn::NetworkState(attractors[i].states[j], spec.n).to_string();
        }
        std::cout << attractors[i].id << ',' << attractors[i].states.size() << ',' << states << ','
                  << format_double(freq.frequency[i]) << "\n";
    }
    std::cout << "# timeout_fraction," << format_double(freq.timeout_fraction) << "\n";
    std::cout << "# suggested_target," << suggested << "\n";
    return 0;
}

int cmd_train(const pbn::RunConfig& cfg) {
    const std::string spec_text = pbn::read_file(cfg.spec_path);
    const pbn::PBNSpec spec = pbn::parse_spec(spec_text);
    const TargetSelection sel = select_target(spec, cfg);
    const pbn::ControlConfig env_cfg = make_env_config(cfg, sel);
    std::cerr << "training: n=" << spec.n << " target attractor size "
              << sel.target.states.size() << "\n";
    const pbn::TrainResult result = pbn::train(spec, env_cfg, cfg.train);
    std::filesystem::create_directories(cfg.out_dir);
    pbn::write_file(cfg.out_dir + "/metrics.csv", metrics_csv(result.metrics));
    pbn::write_file(cfg.out_dir + "/checkpoint.json", pbn::save_checkpoint(result.network));
    write_manifest(cfg.out_dir, cfg, spec_text, "train");
    std::cout << "wrote " << cfg.out_dir << "/metrics.csv and checkpoint.json\n";
    return 0;
}

int cmd_eval(const pbn::RunConfig& cfg, const std::string& checkpoint_path, int episodes) {
    const pbn::PBNSpec spec = pbn::parse_spec(pbn::read_file(cfg.spec_path));
    const TargetSelection sel = select_target(spec, cfg);
    const pbn::ControlConfig env_cfg = make_env_config(cfg, sel);
    const pbn::QNetwork net = pbn::load_checkpoint(pbn::read_file(checkpoint_path));
    std::mt19937_64 rng(cfg.train.seed + 1);
    const pbn::EvalResult r = pbn::evaluate(spec, env_cfg, &net, episodes, rng);
    std::cout << "episodes," << episodes << "\n"
              << "success_rate," << format_double(r.success_rate) << "\n"
              << "mean_interventions," << format_double(r.mean_interventions) << "\n"
              << "std_interventions," << format_double(r.std_interventions) << "\n";
    return 0;
}

int cmd_baseline(const pbn::RunConfig& cfg, int episodes, long cap) {
    const pbn::PBNSpec spec = pbn::parse_spec(pbn::read_file(cfg.spec_path));
    const TargetSelection sel = select_target(spec, cfg);
    std::mt19937_64 rng(cfg.train.seed + 2);
    const pbn::BaselineResult r = pbn::random_baseline(spec, sel.target, episodes, cap, rng);
    std::cout << "episodes," << episodes << "\n"
              << "mean_interventions," << format_double(r.mean_interventions) << "\n"
              << "std_interventions," << format_double(r.std_interventions) << "\n"
              << "capped_episodes," << r.capped_episodes << "\n";
    return 0;
}

int cmd_infer(const std::string& csv_path, const std::string& out_path, int k, int top,
              bool binary, bool no_self) {
    std::ifstream in(csv_path);
    if (!in) throw pbn::ConfigError("cannot open file: " + csv_path);
    const pbn::ExpressionMatrix m = pbn::load_expression_csv(in);
    pbn::BinaryMatrix data;
    if (binary) {
        data.genes = m.genes;
        for (const auto& row : m.samples) {
            std::vector<std::uint8_t> bits;
            for (double v : row) bits.push_back(v >= 0.5 ? 1 : 0);
            data.samples.push_back(std::move(bits));
        }
    } else {
        data = pbn::median_quantize(m);
        for (const std::string& w : data.warnings) std::cerr << "warning: " << w << "\n";
    }
    const pbn::PBNSpec spec = pbn::infer_pbn(data, k, top, !no_self);
    pbn::write_file(out_path, pbn::serialize_spec(spec));
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_fixtures(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    pbn::write_file(out_dir + "/pbn10.spec", pbn::serialize_spec(pbn::fixtures::pbn10_spec()));
    pbn::write_file(out_dir + "/pbn20.spec", pbn::serialize_spec(pbn::fixtures::pbn20_spec()));
    pbn::write_file(out_dir + "/melanoma_expression.csv",
                    pbn::fixtures::melanoma_expression_csv());
    std::cout << "wrote pbn10.spec, pbn20.spec, melanoma_expression.csv to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic Boolean Network control toolkit"};
    app.require_subcommand(1);

    std::string spec_path, config_path, out_dir = ".", checkpoint_path, csv_path, out_path;
    std::uint64_t seed = 0;
    int steps = 10, rollouts = pbn::kDefaultFrequencyRollouts, episodes = 10000;
    int horizon = -1;
    long cap = 100000;
    int k = 3, top = 10;
    bool binary = false, no_self = false;

    auto* sim = app.add_subcommand("simulate", "Print a natural-evolution trajectory");
    sim->add_option("--spec", spec_path, "PBN spec file")->required();
    sim->add_option("--steps", steps, "Number of evolution steps");
    sim->add_option("--seed", seed, "Random seed");

    auto* attr = app.add_subcommand("attractors", "List attractors and natural frequencies");
    attr->add_option("--spec", spec_path, "PBN spec file")->required();
    attr->add_option("--rollouts", rollouts, "Monte Carlo rollouts");
    attr->add_option("--seed", seed, "Random seed");

    auto* train = app.add_subcommand("train", "Train the DDQN controller");
    train->add_option("--config", config_path, "Run config JSON")->required();
    train->add_option("--seed", seed, "Override config seed")->default_val(std::uint64_t{0});
    train->add_option("--out", out_dir, "Output directory (overrides config)");

    auto* eval = app.add_subcommand("eval", "Evaluate a trained controller greedily");
    eval->add_option("--config", config_path, "Run config JSON")->required();
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    eval->add_option("--episodes", episodes, "Evaluation episodes");
    eval->add_option("--horizon", horizon, "Override horizon");

    auto* base = app.add_subcommand("baseline", "Random-intervention baseline");
    base->add_option("--config", config_path, "Run config JSON")->required();
    base->add_option("--episodes", episodes, "Baseline episodes")->default_val(1000);
    base->add_option("--cap", cap, "Per-episode step cap");

    auto* infer = app.add_subcommand("infer", "Infer a PBN spec from expression data");
    infer->add_option("--data", csv_path, "Expression CSV")->required();
    infer->add_option("--out", out_path, "Output spec path")->required();
    infer->add_option("--predictors", k, "Predictor set size K");
    infer->add_option("--top", top, "Predictor sets kept per gene");
    infer->add_flag("--binary", binary, "Input is already binary");
    infer->add_flag("--no-self", no_self, "Disallow self predictors");

    auto* fix = app.add_subcommand("fixtures", "Write the bundled example fixtures");
    fix->add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) return cmd_simulate(spec_path, steps, seed);
        if (attr->parsed()) return cmd_attractors(spec_path, rollouts, seed);
        if (fix->parsed()) return cmd_fixtures(resolve_out_dir(out_dir));

        pbn::RunConfig cfg;
        if (!config_path.empty()) {
            cfg = pbn::parse_run_config(pbn::read_file(config_path));
            if (train->parsed() && train->count("--seed")) cfg.train.seed = seed;
            if (train->parsed() && train->count("--out")) cfg.out_dir = out_dir;
            cfg.out_dir = resolve_out_dir(cfg.out_dir);
            if (eval->parsed() && horizon > 0) cfg.train.horizon = horizon;
        }
        if (train->parsed()) return cmd_train(cfg);
        if (eval->parsed()) return cmd_eval(cfg, checkpoint_path, episodes);
        if (base->parsed()) return cmd_baseline(cfg, episodes, cap);
        if (infer->parsed()) return cmd_infer(csv_path, out_path, k, top, binary, no_self);
    } catch (const pbn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const pbn::SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return 0;
}
