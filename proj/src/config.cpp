#include "egan/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <vector>

#include "egan/errors.hpp"
#include "egan/text.hpp"

namespace egan {

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::none: return "none";
        case Mode::gan: return "gan";
        case Mode::egan: return "egan";
    }
    return "none";
}

Mode parse_mode(std::string_view name) {
    if (name == "none") return Mode::none;
    if (name == "gan") return Mode::gan;
    if (name == "egan") return Mode::egan;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected none, gan or egan)");
}

pg::AgentConfig ExperimentConfig::default_agent() {
    pg::AgentConfig a;
    a.optimizer = nn::OptimizerKind::adam;
    return a;
}

int ExperimentConfig::online_episodes() const {
    if (mode == Mode::none && match_sample_budget) return training_episodes + pretrain_episodes;
    return training_episodes;
}

void ExperimentConfig::validate() const {
    if (training_episodes < 0) throw ConfigError("training_episodes must be non-negative");
    if (mode != Mode::none && pretrain_episodes < 1) {
        throw ConfigError("pretrain_episodes must be at least 1 for gan/egan modes");
    }
    if (pretrain_episodes < 0) throw ConfigError("pretrain_episodes must be non-negative");
    if (synthetic_batches < 0) throw ConfigError("synthetic_batches must be non-negative");
    if (synthetic_batch_size < 2) throw ConfigError("synthetic_batch_size must be at least 2");
    if (gan_steps < 0 || enhancer_steps < 0) throw ConfigError("step counts must be non-negative");
    if (refine.batch_size < 2) throw ConfigError("refine_batch_size must be at least 2");
    if (!(refine.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (refine.iterations < 0) throw ConfigError("egan_iterations must be non-negative");
    if (gan.data_dim != experience::kEncodedDim) throw ConfigError("gan data_dim must be 10");
    gan.validate();
    enhancer.validate();
    agent.validate();
    env.validate();
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw ConfigError("bad value '" + std::string(v) + "' for " + std::string(key));
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean '" + std::string(v) + "' for " + std::string(key));
}

std::vector<std::size_t> parse_sizes(std::string_view key, std::string_view v) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const auto part = trim(v.substr(start, comma == std::string_view::npos ? v.npos
                                                                                : comma - start));
        out.push_back(parse_number<std::size_t>(key, part));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}


struct Field {
    std::string_view key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
};

template <typename T>
Field int_field(std::string_view key, T ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) { return std::to_string(c.*member); },
            [member](ExperimentConfig& c, std::string_view k, std::string_view v) {
                c.*member = parse_number<T>(k, v);
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"mode", [](const auto& c) { return std::string(to_string(c.mode)); },
         [](auto& c, auto, auto v) { c.mode = parse_mode(v); }},
        int_field("seed", &ExperimentConfig::seed),
        int_field("pretrain_episodes", &ExperimentConfig::pretrain_episodes),
        int_field("training_episodes", &ExperimentConfig::training_episodes),
        int_field("synthetic_batches", &ExperimentConfig::synthetic_batches),
        int_field("synthetic_batch_size", &ExperimentConfig::synthetic_batch_size),
        {"match_sample_budget", [](const auto& c) { return std::string(c.match_sample_budget ? "true" : "false"); },
         [](auto& c, auto k, auto v) { c.match_sample_budget = parse_bool(k, v); }},
        int_field("gan_steps", &ExperimentConfig::gan_steps),
        int_field("enhancer_steps", &ExperimentConfig::enhancer_steps),

        {"gan_noise_dim", [](const auto& c) { return std::to_string(c.gan.noise_dim); },
         [](auto& c, auto k, auto v) { c.gan.noise_dim = parse_number<std::size_t>(k, v); }},
        {"gan_generator_hidden", [](const auto& c) { return join(c.gan.generator_hidden); },
         [](auto& c, auto k, auto v) { c.gan.generator_hidden = parse_sizes(k, v); }},
        {"gan_discriminator_hidden", [](const auto& c) { return join(c.gan.discriminator_hidden); },
         [](auto& c, auto k, auto v) { c.gan.discriminator_hidden = parse_sizes(k, v); }},
        {"gan_learning_rate", [](const auto& c) { return format_double(c.gan.learning_rate); },
         [](auto& c, auto k, auto v) { c.gan.learning_rate = parse_number<double>(k, v); }},
        {"gan_optimizer", [](const auto& c) { return std::string(nn::to_string(c.gan.optimizer)); },
         [](auto& c, auto, auto v) { c.gan.optimizer = nn::parse_optimizer(v); }},
        {"gan_batch_size", [](const auto& c) { return std::to_string(c.gan.batch_size); },
         [](auto& c, auto k, auto v) { c.gan.batch_size = parse_number<std::size_t>(k, v); }},
        {"gan_generator_loss", [](const auto& c) { return std::string(gan::to_string(c.gan.generator_loss)); },
         [](auto& c, auto, auto v) { c.gan.generator_loss = gan::parse_generator_loss(v); }},
        {"gan_discriminator_steps", [](const auto& c) { return std::to_string(c.gan.discriminator_steps); },
         [](auto& c, auto k, auto v) { c.gan.discriminator_steps = parse_number<int>(k, v); }},

        {"enhancer_hidden", [](const auto& c) { return join(c.enhancer.hidden); },
         [](auto& c, auto k, auto v) { c.enhancer.hidden = parse_sizes(k, v); }},
        {"enhancer_learning_rate", [](const auto& c) { return format_double(c.enhancer.learning_rate); },
         [](auto& c, auto k, auto v) { c.enhancer.learning_rate = parse_number<double>(k, v); }},
        {"enhancer_optimizer", [](const auto& c) { return std::string(nn::to_string(c.enhancer.optimizer)); },
         [](auto& c, auto, auto v) { c.enhancer.optimizer = nn::parse_optimizer(v); }},
        {"enhancer_batch_size", [](const auto& c) { return std::to_string(c.enhancer.batch_size); },
         [](auto& c, auto k, auto v) { c.enhancer.batch_size = parse_number<std::size_t>(k, v); }},

        {"lambda", [](const auto& c) { return format_double(c.refine.lambda); },
         [](auto& c, auto k, auto v) { c.refine.lambda = parse_number<double>(k, v); }},
        {"egan_iterations", [](const auto& c) { return std::to_string(c.refine.iterations); },
         [](auto& c, auto k, auto v) { c.refine.iterations = parse_number<int>(k, v); }},
        {"refine_batch_size", [](const auto& c) { return std::to_string(c.refine.batch_size); },
         [](auto& c, auto k, auto v) { c.refine.batch_size = parse_number<std::size_t>(k, v); }},
        {"refine_mode", [](const auto& c) { return std::string(enhancer::to_string(c.refine.mode)); },
         [](auto& c, auto, auto v) { c.refine.mode = enhancer::parse_refine_mode(v); }},

        {"policy_hidden", [](const auto& c) { return join(c.agent.hidden); },
         [](auto& c, auto k, auto v) { c.agent.hidden = parse_sizes(k, v); }},
        {"policy_learning_rate", [](const auto& c) { return format_double(c.agent.learning_rate); },
         [](auto& c, auto k, auto v) { c.agent.learning_rate = parse_number<double>(k, v); }},
        {"policy_optimizer", [](const auto& c) { return std::string(nn::to_string(c.agent.optimizer)); },
         [](auto& c, auto, auto v) { c.agent.optimizer = nn::parse_optimizer(v); }},
        {"gamma", [](const auto& c) { return format_double(c.agent.gamma); },
         [](auto& c, auto k, auto v) { c.agent.gamma = parse_number<double>(k, v); }},
        {"update_frequency", [](const auto& c) { return std::to_string(c.agent.update_frequency); },
         [](auto& c, auto k, auto v) { c.agent.update_frequency = parse_number<int>(k, v); }},

        {"env_max_steps", [](const auto& c) { return std::to_string(c.env.max_steps); },
         [](auto& c, auto k, auto v) { c.env.max_steps = parse_number<int>(k, v); }},

        {"output_dir", [](const auto& c) { return c.output_dir.string(); },
         [](auto& c, auto, auto v) { c.output_dir = std::string(v); }},
    };
    return table;
}

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
    for (const auto& f : fields()) {
        if (f.key == key) {
            f.set(config, key, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            apply_setting(base, trim(std::string_view(text).substr(0, eq)),
                          trim(std::string_view(text).substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, std::move(base));
}

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream out;
    for (const auto& f : fields()) out << f.key << " = " << f.get(config) << '\n';
    return out.str();
}

}  // namespace egan
