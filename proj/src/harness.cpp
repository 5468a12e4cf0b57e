#include "egan/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include "egan/errors.hpp"
#include "egan/text.hpp"
#include "egan/pipeline.hpp"

namespace egan {

std::vector<double> LearningCurve::rewards() const {
    std::vector<double> r;
    r.reserve(points.size());
    for (const auto& p : points) r.push_back(p.reward);
    return r;
}

std::vector<double> LearningCurve::samples() const {
    std::vector<double> s;
    s.reserve(points.size());
    for (const auto& p : points) s.push_back(static_cast<double>(p.cumulative_samples));
    return s;
}

RunResult run_experiment_full(const ExperimentConfig& config) {
    config.validate();

    auto policy_init = derive_rng(config.seed, kPolicyInitStream);
    RunResult result{LearningCurve{config.mode, config.seed, 0, {}},
                     {}, {}, {}, {},
                     pg::PolicyAgent(config.agent, policy_init),
                     std::nullopt, std::nullopt};

    if (config.mode != Mode::none) {
        auto pre = pretrain_pipeline(config);
        result.curve.offset = pre.real_samples;
        result.pretrain_losses = pg::pretrain_on_synthetic(result.agent, synthetic_batches(pre, config));
        result.gan_history = std::move(pre.gan_history);
        result.enhancer_history = std::move(pre.enhancer_history);
        result.kl_history = std::move(pre.kl_history);
        result.gan = std::move(pre.gan);
        result.enhancer = std::move(pre.enhancer);
    }

    env::CartPole env(config.env);
    auto rng = derive_rng(config.seed, kPolicyRunStream);
    std::size_t samples = result.curve.offset;
    const int episodes = config.online_episodes();
    result.curve.points.reserve(static_cast<std::size_t>(episodes));
    for (int ep = 1; ep <= episodes; ++ep) {
        auto trace = pg::play_episode(result.agent, env, rng);
        samples += trace.size();
        double reward = 0.0;
        for (double r : trace.rewards) reward += r;
        result.curve.points.push_back(CurvePoint{ep, reward, samples});
        result.agent.record(std::move(trace));
        if (result.agent.update_due()) result.agent.update_on_episodes();
    }
    return result;
}

LearningCurve run_experiment(const ExperimentConfig& config) {
    return run_experiment_full(config).curve;
}

std::vector<double> rolling_average(std::span<const double> values, std::size_t window) {
    if (window == 0) throw UsageError("rolling_average: window must be at least 1");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        double sum = 0.0;
        for (std::size_t j = first; j <= i; ++j) sum += values[j];
        out[i] = sum / static_cast<double>(i - first + 1);
    }
    return out;
}

std::optional<std::size_t> samples_to_threshold(const LearningCurve& curve, double threshold,
                                                std::size_t window) {
    const auto rewards = curve.rewards();
    const auto avg = rolling_average(rewards, window);
    for (std::size_t i = 0; i < avg.size(); ++i) {
        if (avg[i] >= threshold) return curve.points[i].cumulative_samples;
    }
    return std::nullopt;
}

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    if (*it == x) return ys[hi];
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

AggregateBin summarize(double bin, const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return AggregateBin{bin, mean, std::sqrt(var / n)};
}

}  // namespace

std::vector<AggregateBin> aggregate_runs(std::span<const LearningCurve> curves, double bin_width) {
    if (curves.size() < 2) throw UsageError("aggregate_runs: need at least 2 curves");
    if (!(bin_width > 0.0)) throw UsageError("aggregate_runs: bin width must be positive");

    std::vector<std::vector<double>> xs, ys;
    double start = -std::numeric_limits<double>::infinity();
    double end = std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
        if (c.points.empty()) throw UsageError("aggregate_runs: empty curve");
        xs.push_back(c.samples());
        ys.push_back(rolling_average(c.rewards()));
        start = std::max(start, xs.back().front());
        end = std::min(end, xs.back().back());
    }

    std::vector<AggregateBin> bins;
    std::vector<double> column(curves.size());
    for (std::size_t k = 0;; ++k) {
        const double x = start + static_cast<double>(k) * bin_width;
        if (x > end) break;
        for (std::size_t c = 0; c < curves.size(); ++c) column[c] = interpolate(xs[c], ys[c], x);
        bins.push_back(summarize(x, column));
    }
    return bins;
}

std::vector<AggregateBin> aggregate_by_episode(std::span<const LearningCurve> curves) {
    if (curves.size() < 2) throw UsageError("aggregate_by_episode: need at least 2 curves");
    std::size_t common = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<double>> avgs;
    for (const auto& c : curves) {
        common = std::min(common, c.points.size());
        avgs.push_back(rolling_average(c.rewards()));
    }
    std::vector<AggregateBin> bins;
    std::vector<double> column(curves.size());
    for (std::size_t e = 0; e < common; ++e) {
        for (std::size_t c = 0; c < curves.size(); ++c) column[c] = avgs[c][e];
        bins.push_back(summarize(static_cast<double>(e + 1), column));
    }
    return bins;
}

std::vector<SweepResult> sweep_pretrain_length(const ExperimentConfig& base,
                                               std::span<const int> lengths,
                                               std::span<const std::uint64_t> seeds) {
    if (lengths.empty()) throw ConfigError("sweep: no pre-training lengths given");
    if (seeds.size() < 2) throw ConfigError("sweep: need at least 2 seeds to aggregate");
    std::vector<SweepResult> out;
    for (int length : lengths) {
        SweepResult r;
        r.pretrain_episodes = length;
        for (auto seed : seeds) {
            ExperimentConfig cfg = base;
            cfg.pretrain_episodes = length;
            cfg.seed = seed;
            r.curves.push_back(run_experiment(cfg));
            r.mean_offset += static_cast<double>(r.curves.back().offset);
        }
        r.mean_offset /= static_cast<double>(seeds.size());
        r.by_samples = aggregate_runs(r.curves);
        r.by_episode = aggregate_by_episode(r.curves);
        out.push_back(std::move(r));
    }
    return out;
}

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw UsageError("quartiles: no values");
    std::sort(values.begin(), values.end());
    auto q = [&](double p) {
        const double h = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const double frac = h - static_cast<double>(lo);
        if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
        if (std::isinf(values[lo + 1])) return values[lo + 1];
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };
    return Quartiles{q(0.25), q(0.5), q(0.75)};
}

std::vector<ReportRow> report(const std::map<Mode, std::vector<LearningCurve>>& runs,
                              double threshold) {
    std::vector<ReportRow> rows;
    for (const auto& [mode, curves] : runs) {
        if (curves.empty()) continue;
        std::vector<double> values;
        for (const auto& c : curves) {
            const auto s = samples_to_threshold(c, threshold);
            values.push_back(s ? static_cast<double>(*s) : std::numeric_limits<double>::infinity());
        }
        rows.push_back(ReportRow{mode, curves.size(), quartiles(std::move(values))});
    }
    return rows;
}

// --- files -------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}


}  // namespace

std::string curve_filename(Mode mode, std::uint64_t seed) {
    return "curve_" + std::string(to_string(mode)) + "_" + std::to_string(seed) + ".csv";
}

void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "episode,reward,cumulative_samples\n";
    for (const auto& p : curve.points) {
        out << p.episode << ',' << format_double(p.reward) << ',' << p.cumulative_samples << '\n';
    }
}

LearningCurve read_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "episode,reward,cumulative_samples") {
        throw ParseError("expected header 'episode,reward,cumulative_samples'", 1);
    }
    LearningCurve curve;
    static const std::regex name_re(R"(curve_(none|gan|egan)_(\d+)\.csv)");
    std::smatch m;
    const auto name = path.filename().string();
    if (std::regex_match(name, m, name_re)) {
        curve.mode = parse_mode(m[1].str());
        curve.seed = std::stoull(m[2].str());
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        CurvePoint p;
        char c1 = 0, c2 = 0;
        std::string rest;
        if (!(ls >> p.episode >> c1 >> p.reward >> c2 >> p.cumulative_samples) || c1 != ',' ||
            c2 != ',' || (ls >> rest)) {
            throw ParseError("malformed curve row", line_no);
        }
        curve.points.push_back(p);
    }
    // CartPole rewards equal episode lengths, so the first row fixes the offset.
    if (!curve.points.empty()) {
        const auto& first = curve.points.front();
        const auto len = static_cast<std::size_t>(first.reward);
        curve.offset = first.cumulative_samples >= len ? first.cumulative_samples - len : 0;
    }
    return curve;
}

void write_aggregate_csv(std::span<const AggregateBin> bins, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "samples_bin,mean,std\n";
    for (const auto& b : bins) out << format_double(b.bin) << ',' << format_double(b.mean) << ',' << format_double(b.std) << '\n';
}

void write_report_csv(std::span<const ReportRow> rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "mode,median_samples_to_threshold,iqr\n";
    for (const auto& r : rows) {
        const auto& q = r.samples_to_threshold;
        const double iqr = std::isinf(q.q75) ? std::numeric_limits<double>::infinity() : q.iqr();
        out << to_string(r.mode) << ',' << format_double(q.median) << ',' << format_double(iqr) << '\n';
    }
}

void write_sweep_csv(std::span<const SweepResult> sweep, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "pretrain_episodes,axis,bin,mean,std\n";
    for (const auto& s : sweep) {
        for (const auto& b : s.by_samples) {
            out << s.pretrain_episodes << ",samples," << format_double(b.bin) << ',' << format_double(b.mean) << ','
                << format_double(b.std) << '\n';
        }
        for (const auto& b : s.by_episode) {
            out << s.pretrain_episodes << ",episode," << format_double(b.bin) << ',' << format_double(b.mean) << ','
                << format_double(b.std) << '\n';
        }
    }
}

std::map<Mode, std::vector<LearningCurve>> load_run_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("runs directory " + dir.string() + " does not exist");
    }
    static const std::regex name_re(R"(curve_(none|gan|egan)_(\d+)\.csv)");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (std::regex_match(entry.path().filename().string(), name_re)) files.push_back(entry.path());
    }
    std::map<Mode, std::vector<LearningCurve>> out;
    for (const auto& f : files) {
        auto c = read_curve_csv(f);
        out[c.mode].push_back(std::move(c));
    }
    for (auto& [mode, curves] : out) {
        std::sort(curves.begin(), curves.end(),
                  [](const auto& a, const auto& b) { return a.seed < b.seed; });
    }
    return out;
}

}  // namespace egan
