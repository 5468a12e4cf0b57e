#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egan/errors.hpp"
#include "egan/harness.hpp"
#include "egan/pipeline.hpp"
#include "egan/text.hpp"

namespace fs = std::filesystem;
using namespace egan;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("bad seed '" + text + "'");
    }
    return v;
}

// "3", "0-9" or "1,4,7"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_seed(part));
            continue;
        }
        const auto lo = parse_seed(part.substr(0, dash));
        const auto hi = parse_seed(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("bad seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    if (out.empty()) throw ConfigError("no seeds given");
    return out;
}

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key = value settings file");
    cmd->add_option("--set", opts.overrides, "extra key=value settings, applied after --config");
    cmd->add_option("--out", opts.out, "output directory");
}

ExperimentConfig build_config(const CommonOptions& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opts.out.empty()) cfg.output_dir = opts.out;
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string run_tag(Mode mode, std::uint64_t seed) {
    return std::string(to_string(mode)) + "_" + std::to_string(seed);
}

void do_run(ExperimentConfig cfg, const std::vector<std::uint64_t>& seeds, bool save_models) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    for (auto seed : seeds) {
        cfg.seed = seed;
        const auto tag = run_tag(cfg.mode, seed);
        std::cerr << "run " << tag << " ..." << std::flush;
        const auto r = run_experiment_full(cfg);
        const fs::path dir = cfg.output_dir;
        write_curve_csv(r.curve, dir / curve_filename(cfg.mode, seed));
        write_text(dir / ("config_" + tag + ".txt"), serialize_config(cfg));
        if (!r.gan_history.empty()) gan::save_loss_history(r.gan_history, dir / ("gan_loss_" + tag + ".csv"));
        if (!r.kl_history.empty()) enhancer::save_kl_history(r.kl_history, dir / ("kl_" + tag + ".csv"));
        if (save_models) {
            nn::save_network(r.agent.policy(), dir / ("policy_" + tag + ".mlp"));
            if (r.gan) {
                nn::save_network(r.gan->generator, dir / ("generator_" + tag + ".mlp"));
                nn::save_network(r.gan->discriminator, dir / ("discriminator_" + tag + ".mlp"));
            }
            if (r.enhancer) nn::save_network(r.enhancer->net, dir / ("enhancer_" + tag + ".mlp"));
        }
        const auto stt = samples_to_threshold(r.curve, 120.0);
        std::cerr << " offset " << r.curve.offset << ", final samples "
                  << r.curve.points.back().cumulative_samples << ", samples to 120: "
                  << (stt ? std::to_string(*stt) : "not reached") << "\n";
    }
}

std::vector<int> parse_lengths(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        int v = 0;
        auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || end != part.data() + part.size() || v < 1) {
            throw ConfigError("bad pre-training length '" + part + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("no pre-training lengths given");
    return out;
}

void do_sweep(const ExperimentConfig& cfg, const std::vector<int>& lengths,
              const std::vector<std::uint64_t>& seeds) {
    cfg.validate();
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const auto sweep = sweep_pretrain_length(cfg, lengths, seeds);
    for (const auto& r : sweep) {
        const auto sub = dir / ("pretrain_" + std::to_string(r.pretrain_episodes));
        fs::create_directories(sub);
        for (const auto& c : r.curves) write_curve_csv(c, sub / curve_filename(c.mode, c.seed));
        write_aggregate_csv(r.by_samples, sub / ("aggregate_" + std::string(to_string(cfg.mode)) + ".csv"));
        std::cerr << "pretrain " << r.pretrain_episodes << ": mean offset "
                  << format_double(r.mean_offset) << "\n";
    }
    write_sweep_csv(sweep, dir / "sweep.csv");
}

void do_report(const fs::path& runs, double threshold, fs::path out) {
    if (!fs::is_directory(runs)) throw ConfigError("runs directory not found: " + runs.string());
    if (out.empty()) out = runs;
    fs::create_directories(out);
    const auto curves = load_run_directory(runs);
    if (curves.empty()) throw ConfigError("no curve_<mode>_<seed>.csv files in " + runs.string());
    const auto rows = report(curves, threshold);
    write_report_csv(rows, out / "report.csv");
    for (const auto& [mode, list] : curves) {
        if (list.size() < 2) continue;
        write_aggregate_csv(aggregate_runs(list), out / ("aggregate_" + std::string(to_string(mode)) + ".csv"));
    }
    std::cout << "mode   runs  median_samples_to_" << format_double(threshold) << "  iqr\n";
    for (const auto& r : rows) {
        std::cout << to_string(r.mode) << std::string(7 - to_string(r.mode).size(), ' ') << r.runs
                  << "     " << format_double(r.samples_to_threshold.median) << "  "
                  << format_double(r.samples_to_threshold.iqr()) << "\n";
    }
}

void do_collect(int episodes, std::uint64_t seed, const fs::path& path) {
    env::CartPole env;
    auto rng = derive_rng(seed, kCollectStream);
    const auto buffer = experience::collect_random(env, episodes, rng);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    experience::save_csv(buffer, path);
    experience::save_stats(buffer.stats(), experience::stats_sidecar_path(path));
    std::cerr << buffer.size() << " transitions from " << episodes << " episodes\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EGAN pre-training experiments on CartPole"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    std::string mode_name, seed_text, seeds_text;
    bool save_models = false;
    auto* run = app.add_subcommand("run", "train one agent per seed and write its learning curve");
    run->add_option("--mode", mode_name, "none, gan or egan");
    run->add_option("--seed", seed_text, "single seed");
    run->add_option("--seeds", seeds_text, "seed list or range, e.g. 0-9");
    run->add_flag("--save-models", save_models, "also write network checkpoints");
    add_common(run, run_opts);

    CommonOptions sweep_opts;
    std::string lengths_text = "500,5000", sweep_seeds = "0-9", sweep_mode;
    auto* sweep = app.add_subcommand("sweep", "aggregate learning curves over pre-training lengths");
    sweep->add_option("--lengths", lengths_text, "comma-separated pre-training episode counts");
    sweep->add_option("--seeds", sweep_seeds, "seed list or range");
    sweep->add_option("--mode", sweep_mode, "gan or egan");
    add_common(sweep, sweep_opts);

    std::string runs_dir, report_out;
    double threshold = 120.0;
    auto* rep = app.add_subcommand("report", "samples-to-threshold summary over a run directory");
    rep->add_option("--runs", runs_dir, "directory of curve CSVs")->required();
    rep->add_option("--threshold", threshold, "rolling reward threshold");
    rep->add_option("--out", report_out, "output directory (defaults to --runs)");

    int collect_episodes = 500;
    std::uint64_t collect_seed = 0;
    std::string collect_path;
    auto* collect = app.add_subcommand("collect", "random-policy dataset with a stats sidecar");
    collect->add_option("--episodes", collect_episodes, "episodes to play");
    collect->add_option("--seed", collect_seed, "seed");
    collect->add_option("--out", collect_path, "dataset CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            auto cfg = build_config(run_opts);
            if (!mode_name.empty()) cfg.mode = parse_mode(mode_name);
            std::vector<std::uint64_t> seeds{cfg.seed};
            if (!seed_text.empty() && !seeds_text.empty()) throw ConfigError("use --seed or --seeds, not both");
            if (!seed_text.empty()) seeds = {parse_seed(seed_text)};
            if (!seeds_text.empty()) seeds = parse_seeds(seeds_text);
            do_run(cfg, seeds, save_models);
        } else if (*sweep) {
            auto cfg = build_config(sweep_opts);
            if (!sweep_mode.empty()) cfg.mode = parse_mode(sweep_mode);
            if (cfg.mode == Mode::none) throw ConfigError("sweep needs mode gan or egan");
            do_sweep(cfg, parse_lengths(lengths_text), parse_seeds(sweep_seeds));
        } else if (*rep) {
            do_report(runs_dir, threshold, report_out);
        } else if (*collect) {
            do_collect(collect_episodes, collect_seed, collect_path);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
