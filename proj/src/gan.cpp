#include "egan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "egan/errors.hpp"
#include "egan/text.hpp"

namespace egan::gan {

namespace {

constexpr double kProbFloor = 1e-7;

std::vector<std::size_t> sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                               std::size_t out) {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

std::vector<nn::Activation> acts(std::size_t hidden, nn::Activation head) {
    std::vector<nn::Activation> a(hidden, nn::Activation::tanh);
    a.push_back(head);
    return a;
}

// d log(clamp(p)) / dp, zero where the clamp is active.
double dlog(double p) { return (p >= kProbFloor && p <= 1.0 - kProbFloor) ? 1.0 / p : 0.0; }
// d log(1 - clamp(p)) / dp.
double dlog1m(double p) {
    return (p >= kProbFloor && p <= 1.0 - kProbFloor) ? -1.0 / (1.0 - p) : 0.0;
}

}  // namespace

std::string_view to_string(GeneratorLoss l) {
    return l == GeneratorLoss::minimax ? "minimax" : "non_saturating";
}

GeneratorLoss parse_generator_loss(std::string_view name) {
    if (name == "minimax") return GeneratorLoss::minimax;
    if (name == "non_saturating") return GeneratorLoss::non_saturating;
    throw ConfigError("unknown generator loss '" + std::string(name) + "'");
}

void GanConfig::validate() const {
    if (noise_dim == 0 || data_dim == 0) throw ConfigError("GAN dimensions must be positive");
    if (batch_size < 2) throw ConfigError("GAN batch size must be at least 2");
    if (!(learning_rate >= 0.0)) throw ConfigError("GAN learning rate must be non-negative");
    if (discriminator_steps < 1) throw ConfigError("discriminator steps must be at least 1");
}

GanPair make_gan(const GanConfig& config, Rng& rng) {
    config.validate();
    GanPair gan;
    gan.config = config;
    gan.generator = nn::init_network(sizes(config.noise_dim, config.generator_hidden, config.data_dim),
                                     acts(config.generator_hidden.size(), nn::Activation::tanh), rng);
    gan.discriminator = nn::init_network(sizes(config.data_dim, config.discriminator_hidden, 1),
                                         acts(config.discriminator_hidden.size(), nn::Activation::sigmoid),
                                         rng);
    gan.generator_opt = nn::make_optimizer(config.optimizer, config.learning_rate);
    gan.discriminator_opt = nn::make_optimizer(config.optimizer, config.learning_rate);
    return gan;
}

nn::Matrix sample_noise(Rng& rng, std::size_t batch, std::size_t noise_dim) {
    if (batch == 0) throw UsageError("sample_noise: batch must be at least 1");
    nn::Matrix z(batch, noise_dim);
    for (double& v : z.data()) {
        // Reject the single value that would land exactly on -1.
        do {
            v = uniform(rng, -1.0, 1.0);
        } while (v == -1.0);
    }
    return z;
}

double clamp_probability(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

double gan_value(std::span<const double> d_real, std::span<const double> d_fake) {
    if (d_real.empty() || d_fake.empty()) throw UsageError("gan_value: empty batch");
    double real = 0.0;
    for (double p : d_real) real += std::log(clamp_probability(p));
    double fake = 0.0;
    for (double p : d_fake) fake += std::log(1.0 - clamp_probability(p));
    return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

StepGradient discriminator_gradient(const GanPair& gan, const nn::Matrix& real_batch,
                                    const nn::Matrix& noise) {
    const nn::Matrix fake = nn::predict(gan.generator, noise);
    const auto real_cache = nn::forward(gan.discriminator, real_batch);
    const auto fake_cache = nn::forward(gan.discriminator, fake);
    const auto& pr = real_cache.output();
    const auto& pf = fake_cache.output();

    StepGradient out;
    out.loss = -gan_value(pr.data(), pf.data());

    // Loss is -V, so each gradient is the negated derivative of V.
    nn::Matrix g_real(pr.rows(), 1);
    const double nr = static_cast<double>(pr.rows());
    for (std::size_t i = 0; i < pr.rows(); ++i) g_real(i, 0) = -dlog(pr(i, 0)) / nr;
    nn::Matrix g_fake(pf.rows(), 1);
    const double nf = static_cast<double>(pf.rows());
    for (std::size_t i = 0; i < pf.rows(); ++i) g_fake(i, 0) = -dlog1m(pf(i, 0)) / nf;

    out.grads = nn::backward(gan.discriminator, real_cache, g_real).grads;
    out.grads.add(nn::backward(gan.discriminator, fake_cache, g_fake).grads);
    return out;
}

StepGradient generator_gradient(const GanPair& gan, const nn::Matrix& noise, GeneratorLoss mode) {
    const auto g_cache = nn::forward(gan.generator, noise);
    const auto d_cache = nn::forward(gan.discriminator, g_cache.output());
    const auto& p = d_cache.output();
    const double n = static_cast<double>(p.rows());

    StepGradient out;
    nn::Matrix dp(p.rows(), 1);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const double pc = clamp_probability(p(i, 0));
        if (mode == GeneratorLoss::non_saturating) {
            out.loss -= std::log(pc) / n;
            dp(i, 0) = -dlog(p(i, 0)) / n;
        } else {
            out.loss += std::log(1.0 - pc) / n;
            dp(i, 0) = dlog1m(p(i, 0)) / n;
        }
    }
    const auto through_d = nn::backward(gan.discriminator, d_cache, dp);
    out.grads = nn::backward(gan.generator, g_cache, through_d.input_grad).grads;
    return out;
}

double discriminator_step(GanPair& gan, const nn::Matrix& real_batch, Rng& rng) {
    if (real_batch.rows() < 2) throw UsageError("discriminator_step: batch needs at least 2 rows");
    if (real_batch.cols() != gan.config.data_dim) {
        throw ShapeError("discriminator_step: real batch width does not match data_dim");
    }
    const auto noise = sample_noise(rng, real_batch.rows(), gan.config.noise_dim);
    auto step = discriminator_gradient(gan, real_batch, noise);
    nn::optimizer_step(gan.discriminator, step.grads, gan.discriminator_opt);
    return step.loss;
}

double generator_step(GanPair& gan, Rng& rng, GeneratorLoss mode) {
    const auto noise = sample_noise(rng, gan.config.batch_size, gan.config.noise_dim);
    auto step = generator_gradient(gan, noise, mode);
    nn::optimizer_step(gan.generator, step.grads, gan.generator_opt);
    return step.loss;
}

std::vector<LossRecord> train_gan(GanPair& gan, const nn::Matrix& data, int n_steps, Rng& rng) {
    if (data.rows() == 0) throw UsageError("train_gan: empty training data");
    const std::size_t batch = std::min(gan.config.batch_size, data.rows());
    if (batch < 2) throw UsageError("train_gan: need at least 2 training rows");

    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    auto next_batch = [&] {
        if (cursor + batch > order.size()) {
            shuffle(order, rng);
            cursor = 0;
        }
        std::span<const std::size_t> idx(order.data() + cursor, batch);
        cursor += batch;
        return data.gather_rows(idx);
    };

    std::vector<LossRecord> history;
    history.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
    for (int s = 0; s < n_steps; ++s) {
        LossRecord rec;
        rec.step = static_cast<std::size_t>(s);
        for (int d = 0; d < gan.config.discriminator_steps; ++d) {
            rec.d_loss = discriminator_step(gan, next_batch(), rng);
        }
        rec.g_loss = generator_step(gan, rng, gan.config.generator_loss);
        history.push_back(rec);
    }
    return history;
}

nn::Matrix generate_encoded(const GanPair& gan, std::size_t n, Rng& rng) {
    if (n == 0) return nn::Matrix(0, gan.config.data_dim);
    return nn::predict(gan.generator, sample_noise(rng, n, gan.config.noise_dim));
}

std::vector<experience::Quadruplet> generate(const GanPair& gan, std::size_t n, Rng& rng,
                                             const experience::NormStats& stats,
                                             const env::EnvParams& params) {
    std::vector<experience::Quadruplet> out;
    if (n == 0) return out;
    const auto x = generate_encoded(gan, n, rng);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(experience::decode(x.row(i), stats, params));
    return out;
}

void save_loss_history(const std::vector<LossRecord>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "step,d_loss,g_loss\n";
    for (const auto& r : history) out << r.step << ',' << format_double(r.d_loss) << ',' << format_double(r.g_loss) << '\n';
}

}  // namespace egan::gan
