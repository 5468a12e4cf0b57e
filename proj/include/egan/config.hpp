#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "egan/cartpole.hpp"
#include "egan/enhancer.hpp"
#include "egan/gan.hpp"
#include "egan/pg_agent.hpp"

namespace egan {

enum class Mode { none, gan, egan };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view name);

// Everything one run needs. Defaults are the published settings plus the
// documented choices for values the method leaves open.
struct ExperimentConfig {
    Mode mode = Mode::egan;
    std::uint64_t seed = 0;

    int pretrain_episodes = 500;
    int training_episodes = 5000;
    int synthetic_batches = 6000;
    std::size_t synthetic_batch_size = 64;
    // Mode none also plays the pre-training episodes online so all modes see
    // a comparable sample budget.
    bool match_sample_budget = true;

    int gan_steps = 3000;
    int enhancer_steps = 3000;

    gan::GanConfig gan;
    enhancer::EnhancerConfig enhancer;
    enhancer::RefineConfig refine;
    pg::AgentConfig agent = default_agent();
    env::EnvParams env;

    std::filesystem::path output_dir = "runs";

    // Online episodes actually played in this mode.
    int online_episodes() const;

    // Throws ConfigError on the first invalid field.
    void validate() const;

    static pg::AgentConfig default_agent();
};

// Applies one `key = value` setting. Throws ConfigError for unknown keys or
// unparsable values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// Flat `key = value` text; `#` starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

// Every field, one `key = value` per line, in a stable order; parse_config
// reads it back to an equal config.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace egan
