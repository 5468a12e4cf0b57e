#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egan/config.hpp"
#include "egan/pg_agent.hpp"

namespace egan {

struct CurvePoint {
    int episode = 0;  // 1-based online episode
    double reward = 0.0;
    std::size_t cumulative_samples = 0;  // includes the pre-training offset

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct LearningCurve {
    Mode mode = Mode::none;
    std::uint64_t seed = 0;
    std::size_t offset = 0;  // real samples spent before the first online episode
    std::vector<CurvePoint> points;

    std::vector<double> rewards() const;
    std::vector<double> samples() const;
};

struct RunResult {
    LearningCurve curve;
    std::vector<gan::LossRecord> gan_history;
    std::vector<double> enhancer_history;
    std::vector<double> kl_history;
    std::vector<double> pretrain_losses;
    pg::PolicyAgent agent;
    std::optional<gan::GanPair> gan;
    std::optional<enhancer::EnhancerModel> enhancer;
};

// Validates first (ConfigError before any work), then pre-trains according to
// mode and plays config.online_episodes() episodes with REINFORCE.
RunResult run_experiment_full(const ExperimentConfig& config);
LearningCurve run_experiment(const ExperimentConfig& config);

inline constexpr std::size_t kRollingWindow = 100;

// Element i is the mean of values[max(0, i - window + 1) .. i].
std::vector<double> rolling_average(std::span<const double> values,
                                    std::size_t window = kRollingWindow);

// First cumulative sample count at which the rolling reward reaches threshold.
std::optional<std::size_t> samples_to_threshold(const LearningCurve& curve, double threshold,
                                                std::size_t window = kRollingWindow);

struct AggregateBin {
    double bin = 0.0;  // cumulative samples, or online episode number
    double mean = 0.0;
    double std = 0.0;  // population standard deviation across runs
};

inline constexpr double kSampleBinWidth = 500.0;

// Rolling rewards resampled by linear interpolation onto a shared grid of
// cumulative samples starting at the latest first sample and ending at the
// earliest last sample. UsageError with fewer than 2 curves.
std::vector<AggregateBin> aggregate_runs(std::span<const LearningCurve> curves,
                                         double bin_width = kSampleBinWidth);

// Per online episode over the common episode range.
std::vector<AggregateBin> aggregate_by_episode(std::span<const LearningCurve> curves);

struct SweepResult {
    int pretrain_episodes = 0;
    std::vector<LearningCurve> curves;
    std::vector<AggregateBin> by_samples;
    std::vector<AggregateBin> by_episode;
    double mean_offset = 0.0;
};

std::vector<SweepResult> sweep_pretrain_length(const ExperimentConfig& base,
                                               std::span<const int> lengths,
                                               std::span<const std::uint64_t> seeds);

struct Quartiles {
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    // Infinite when even the lower quartile never reached the threshold.
    double iqr() const { return std::isinf(q25) ? q25 : q75 - q25; }
};

// Linear-interpolation quantiles. Not-reached runs count as +infinity.
Quartiles quartiles(std::vector<double> values);

struct ReportRow {
    Mode mode = Mode::none;
    std::size_t runs = 0;
    Quartiles samples_to_threshold;
};

std::vector<ReportRow> report(const std::map<Mode, std::vector<LearningCurve>>& runs,
                              double threshold);

// --- files -------------------------------------------------------------------

std::string curve_filename(Mode mode, std::uint64_t seed);

// `episode,reward,cumulative_samples`
void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path);
LearningCurve read_curve_csv(const std::filesystem::path& path);

// `samples_bin,mean,std`
void write_aggregate_csv(std::span<const AggregateBin> bins, const std::filesystem::path& path);
// `mode,median_samples_to_threshold,iqr`
void write_report_csv(std::span<const ReportRow> rows, const std::filesystem::path& path);
// `pretrain_episodes,axis,bin,mean,std` with axis in {samples, episode}
void write_sweep_csv(std::span<const SweepResult> sweep, const std::filesystem::path& path);

// Reads every curve_<mode>_<seed>.csv in dir, grouped by mode.
std::map<Mode, std::vector<LearningCurve>> load_run_directory(const std::filesystem::path& dir);

}  // namespace egan
