#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "egan/gan.hpp"
#include "egan/mlp.hpp"
#include "egan/optimizer.hpp"

namespace egan::enhancer {

struct EnhancerConfig {
    std::vector<std::size_t> hidden = {60, 60};
    double learning_rate = 1e-3;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    std::size_t batch_size = 64;

    void validate() const;
};

// Regression network x1 = (s_t, a) -> x2 = (s_{t+1}, r) in encoded coordinates.
struct EnhancerModel {
    EnhancerConfig config;
    nn::Mlp net;
    nn::OptimizerState opt;
};

EnhancerModel make_enhancer(const EnhancerConfig& config, Rng& rng);

// MSE of E(x1) against x2 over the rows of an encoded batch, with its gradient.
gan::StepGradient enhancer_gradient(const EnhancerModel& model, const nn::Matrix& rows);

// Minibatch MSE regression of x2 on x1 over rows of an n x 10 encoded matrix.
std::vector<double> train_enhancer(EnhancerModel& model, const nn::Matrix& encoded, int n_steps,
                                   Rng& rng);

// Mean over rows and the 5 outputs of (E(x1) - x2)^2.
double enhancer_mse(const EnhancerModel& model, const nn::Matrix& encoded);
// MSE of predicting every x2 in `test` by the column means of x2 in `train`.
double mean_predictor_mse(const nn::Matrix& train, const nn::Matrix& test);

struct BatchGaussian {
    std::vector<double> mean;
    std::vector<double> var;

    std::size_t dim() const { return mean.size(); }
};

inline constexpr double kVarianceFloor = 1e-6;

// Per-column mean and biased (1/n) variance, floored at kVarianceFloor.
// UsageError below 2 rows.
BatchGaussian fit_gaussian(const nn::Matrix& batch);

// Closed-form KL(P || Q) between diagonal Gaussians.
double gaussian_kl(const BatchGaussian& p, const BatchGaussian& q);

// KL between diagonal Gaussians fitted to the two batches. ShapeError on width mismatch.
double kl_regularizer(const nn::Matrix& p_batch, const nn::Matrix& q_batch);

// d kl_regularizer / d p_batch entries, q_batch held constant.
nn::Matrix kl_regularizer_gradient(const nn::Matrix& p_batch, const nn::Matrix& q_batch);

enum class RefineMode {
    separate,  // step on lambda * KL alone
    joint,     // step on generator GAN loss + lambda * KL
};

std::string_view to_string(RefineMode m);
RefineMode parse_refine_mode(std::string_view name);

struct RefineConfig {
    int iterations = 2;
    double lambda = 1.0;
    std::size_t batch_size = 64;
    RefineMode mode = RefineMode::separate;
};

// lambda * KL(G2(z) || E(G1(z))) and its gradient w.r.t. generator parameters;
// the enhancer is a constant oracle, so only the G2 half receives gradient.
gan::StepGradient refine_gradient(const gan::GanPair& gan, const EnhancerModel& model,
                                  const nn::Matrix& noise, double lambda);

// Enhancer-guided generator refinement. The test noise batch is drawn once and
// regenerated through the current generator every iteration. Returns the KL
// measured at the start of each iteration. lambda == 0 leaves the generator
// untouched; iterations < 1 is a no-op.
std::vector<double> egan_refine(gan::GanPair& gan, const EnhancerModel& model,
                                const RefineConfig& config, Rng& rng);

// `iter,kl`
void save_kl_history(const std::vector<double>& history, const std::filesystem::path& path);

}  // namespace egan::enhancer
