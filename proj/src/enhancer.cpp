#include "egan/enhancer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "egan/errors.hpp"
#include "egan/text.hpp"

namespace egan::enhancer {

using experience::kHalfDim;

void EnhancerConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw ConfigError("enhancer learning rate must be non-negative");
    if (batch_size < 1) throw ConfigError("enhancer batch size must be positive");
}

EnhancerModel make_enhancer(const EnhancerConfig& config, Rng& rng) {
    config.validate();
    std::vector<std::size_t> sizes{kHalfDim};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(kHalfDim);
    std::vector<nn::Activation> acts(config.hidden.size(), nn::Activation::tanh);
    acts.push_back(nn::Activation::tanh);
    return EnhancerModel{config, nn::init_network(sizes, acts, rng),
                         nn::make_optimizer(config.optimizer, config.learning_rate)};
}

namespace {

void check_encoded(const nn::Matrix& m) {
    if (m.cols() != 2 * kHalfDim) throw ShapeError("enhancer expects 10-column encoded samples");
}

}  // namespace

gan::StepGradient enhancer_gradient(const EnhancerModel& model, const nn::Matrix& rows) {
    check_encoded(rows);
    const auto x1 = rows.col_block(0, kHalfDim);
    const auto x2 = rows.col_block(kHalfDim, kHalfDim);
    const auto cache = nn::forward(model.net, x1);
    const auto& pred = cache.output();
    nn::Matrix grad(pred.rows(), pred.cols());
    const double denom = static_cast<double>(pred.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.data()[i] - x2.data()[i];
        loss += diff * diff / denom;
        grad.data()[i] = 2.0 * diff / denom;
    }
    return {loss, nn::backward(model.net, cache, grad).grads};
}

std::vector<double> train_enhancer(EnhancerModel& model, const nn::Matrix& encoded, int n_steps,
                                   Rng& rng) {
    check_encoded(encoded);
    if (encoded.rows() == 0) throw UsageError("train_enhancer: empty training data");
    const std::size_t batch = std::min(model.config.batch_size, encoded.rows());
    std::vector<std::size_t> order(encoded.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
    for (int s = 0; s < n_steps; ++s) {
        if (cursor + batch > order.size()) {
            shuffle(order, rng);
            cursor = 0;
        }
        const auto rows = encoded.gather_rows(std::span(order.data() + cursor, batch));
        cursor += batch;
        auto step = enhancer_gradient(model, rows);
        nn::optimizer_step(model.net, step.grads, model.opt);
        history.push_back(step.loss);
    }
    return history;
}

double enhancer_mse(const EnhancerModel& model, const nn::Matrix& encoded) {
    check_encoded(encoded);
    if (encoded.rows() == 0) throw UsageError("enhancer_mse: empty data");
    const auto pred = nn::predict(model.net, encoded.col_block(0, kHalfDim));
    const auto x2 = encoded.col_block(kHalfDim, kHalfDim);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - x2.data()[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

double mean_predictor_mse(const nn::Matrix& train, const nn::Matrix& test) {
    check_encoded(train);
    check_encoded(test);
    if (train.rows() == 0 || test.rows() == 0) throw UsageError("mean_predictor_mse: empty data");
    std::vector<double> mean(kHalfDim, 0.0);
    for (std::size_t r = 0; r < train.rows(); ++r) {
        for (std::size_t j = 0; j < kHalfDim; ++j) mean[j] += train(r, kHalfDim + j);
    }
    for (double& m : mean) m /= static_cast<double>(train.rows());
    double sum = 0.0;
    for (std::size_t r = 0; r < test.rows(); ++r) {
        for (std::size_t j = 0; j < kHalfDim; ++j) {
            const double d = test(r, kHalfDim + j) - mean[j];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(test.rows() * kHalfDim);
}

BatchGaussian fit_gaussian(const nn::Matrix& batch) {
    if (batch.rows() < 2) throw UsageError("fit_gaussian: need at least 2 rows");
    const std::size_t d = batch.cols();
    const double n = static_cast<double>(batch.rows());
    BatchGaussian g{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) g.mean[j] += batch(r, j);
    }
    for (double& m : g.mean) m /= n;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = batch(r, j) - g.mean[j];
            g.var[j] += c * c;
        }
    }
    for (double& v : g.var) v = std::max(v / n, kVarianceFloor);
    return g;
}

double gaussian_kl(const BatchGaussian& p, const BatchGaussian& q) {
    if (p.dim() != q.dim()) throw ShapeError("gaussian_kl: dimension mismatch");
    double kl = 0.0;
    for (std::size_t j = 0; j < p.dim(); ++j) {
        const double dm = p.mean[j] - q.mean[j];
        kl += 0.5 * std::log(q.var[j] / p.var[j]) + (p.var[j] + dm * dm) / (2.0 * q.var[j]) - 0.5;
    }
    // Rounding can leave identical fits a hair below zero.
    return std::max(kl, 0.0);
}

double kl_regularizer(const nn::Matrix& p_batch, const nn::Matrix& q_batch) {
    if (p_batch.cols() != q_batch.cols()) throw ShapeError("kl_regularizer: width mismatch");
    return gaussian_kl(fit_gaussian(p_batch), fit_gaussian(q_batch));
}

nn::Matrix kl_regularizer_gradient(const nn::Matrix& p_batch, const nn::Matrix& q_batch) {
    if (p_batch.cols() != q_batch.cols()) throw ShapeError("kl_regularizer: width mismatch");
    const auto p = fit_gaussian(p_batch);
    const auto q = fit_gaussian(q_batch);
    const double n = static_cast<double>(p_batch.rows());

    // Raw (unfloored) variance decides whether the floor is active.
    std::vector<double> raw_var(p.dim(), 0.0);
    for (std::size_t r = 0; r < p_batch.rows(); ++r) {
        for (std::size_t j = 0; j < p.dim(); ++j) {
            const double c = p_batch(r, j) - p.mean[j];
            raw_var[j] += c * c / n;
        }
    }

    nn::Matrix grad(p_batch.rows(), p_batch.cols());
    for (std::size_t j = 0; j < p.dim(); ++j) {
        const double d_mean = (p.mean[j] - q.mean[j]) / q.var[j];
        const double d_var =
            raw_var[j] > kVarianceFloor ? 0.5 / q.var[j] - 0.5 / p.var[j] : 0.0;
        for (std::size_t r = 0; r < p_batch.rows(); ++r) {
            grad(r, j) = d_mean / n + d_var * 2.0 * (p_batch(r, j) - p.mean[j]) / n;
        }
    }
    return grad;
}

std::string_view to_string(RefineMode m) { return m == RefineMode::joint ? "joint" : "separate"; }

RefineMode parse_refine_mode(std::string_view name) {
    if (name == "separate") return RefineMode::separate;
    if (name == "joint") return RefineMode::joint;
    throw ConfigError("unknown refine mode '" + std::string(name) + "'");
}

namespace {

struct RefineEval {
    double kl = 0.0;
    gan::StepGradient step;
};

RefineEval evaluate_refine(const gan::GanPair& gan, const EnhancerModel& model,
                           const nn::Matrix& noise, double lambda) {
    if (gan.config.data_dim != 2 * kHalfDim) {
        throw ShapeError("egan refinement needs a generator over 10-dim encoded samples");
    }
    const auto g_cache = nn::forward(gan.generator, noise);
    const auto& generated = g_cache.output();
    const auto g1 = generated.col_block(0, kHalfDim);
    const auto g2 = generated.col_block(kHalfDim, kHalfDim);
    const auto q = nn::predict(model.net, g1);

    RefineEval out;
    out.kl = kl_regularizer(g2, q);
    out.step.loss = lambda * out.kl;
    const auto dkl = kl_regularizer_gradient(g2, q);
    nn::Matrix out_grad(generated.rows(), generated.cols());
    for (std::size_t r = 0; r < generated.rows(); ++r) {
        for (std::size_t j = 0; j < kHalfDim; ++j) out_grad(r, kHalfDim + j) = lambda * dkl(r, j);
    }
    out.step.grads = nn::backward(gan.generator, g_cache, out_grad).grads;
    return out;
}

}  // namespace

gan::StepGradient refine_gradient(const gan::GanPair& gan, const EnhancerModel& model,
                                  const nn::Matrix& noise, double lambda) {
    return evaluate_refine(gan, model, noise, lambda).step;
}

std::vector<double> egan_refine(gan::GanPair& gan, const EnhancerModel& model,
                                const RefineConfig& config, Rng& rng) {
    std::vector<double> history;
    if (config.iterations < 1) return history;
    if (!(config.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (config.batch_size < 2) throw ConfigError("refinement batch needs at least 2 rows");

    const auto noise = gan::sample_noise(rng, config.batch_size, gan.config.noise_dim);
    auto opt = nn::make_optimizer(gan.config.optimizer, gan.config.learning_rate);
    for (int it = 0; it < config.iterations; ++it) {
        auto eval = evaluate_refine(gan, model, noise, config.lambda);
        history.push_back(eval.kl);
        if (config.mode == RefineMode::joint) {
            eval.step.grads.add(
                gan::generator_gradient(gan, noise, gan.config.generator_loss).grads);
        } else if (config.lambda == 0.0) {
            continue;
        }
        nn::optimizer_step(gan.generator, eval.step.grads, opt);
    }
    return history;
}

void save_kl_history(const std::vector<double>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "iter,kl\n";
    for (std::size_t i = 0; i < history.size(); ++i) out << i + 1 << ',' << format_double(history[i]) << '\n';
}

}  // namespace egan::enhancer
