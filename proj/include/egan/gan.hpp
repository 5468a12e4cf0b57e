#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "egan/experience.hpp"
#include "egan/mlp.hpp"
#include "egan/optimizer.hpp"

namespace egan::gan {

enum class GeneratorLoss {
    minimax,   // descend mean log(1 - D(G(z)))
    non_saturating,  // descend -mean log D(G(z))
};

std::string_view to_string(GeneratorLoss l);
GeneratorLoss parse_generator_loss(std::string_view name);

struct GanConfig {
    std::size_t noise_dim = 16;
    std::size_t data_dim = experience::kEncodedDim;
    std::vector<std::size_t> generator_hidden = {40, 20};
    std::vector<std::size_t> discriminator_hidden = {40, 20};
    double learning_rate = 5e-6;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    std::size_t batch_size = 64;
    GeneratorLoss generator_loss = GeneratorLoss::non_saturating;
    int discriminator_steps = 1;  // D steps per G step

    void validate() const;
};

// Generator: noise -> tanh hidden -> tanh data. Discriminator: data -> tanh hidden -> sigmoid.
struct GanPair {
    GanConfig config;
    nn::Mlp generator;
    nn::Mlp discriminator;
    nn::OptimizerState generator_opt;
    nn::OptimizerState discriminator_opt;
};

GanPair make_gan(const GanConfig& config, Rng& rng);

// i.i.d. U(-1, 1).
nn::Matrix sample_noise(Rng& rng, std::size_t batch, std::size_t noise_dim);

// Clamps to [1e-7, 1 - 1e-7]; maps p outside that range to the bound.
double clamp_probability(double p);

// mean log D(x) + mean log(1 - D(G(z))) over clamped probabilities.
double gan_value(std::span<const double> d_real, std::span<const double> d_fake);

struct StepGradient {
    double loss = 0.0;
    nn::Gradients grads;
};

// -V(D, G) and its gradient w.r.t. discriminator parameters for fixed inputs.
StepGradient discriminator_gradient(const GanPair& gan, const nn::Matrix& real_batch,
                                    const nn::Matrix& noise);
// Generator loss and its gradient w.r.t. generator parameters, backpropagated through a frozen D.
StepGradient generator_gradient(const GanPair& gan, const nn::Matrix& noise, GeneratorLoss mode);

// One ascent step on V w.r.t. D. UsageError if real_batch has fewer than 2 rows.
double discriminator_step(GanPair& gan, const nn::Matrix& real_batch, Rng& rng);
double generator_step(GanPair& gan, Rng& rng, GeneratorLoss mode);

struct LossRecord {
    std::size_t step = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
};

// Alternating D/G steps on minibatches drawn from a reshuffled pass over data.
std::vector<LossRecord> train_gan(GanPair& gan, const nn::Matrix& data, int n_steps, Rng& rng);

nn::Matrix generate_encoded(const GanPair& gan, std::size_t n, Rng& rng);
std::vector<experience::Quadruplet> generate(const GanPair& gan, std::size_t n, Rng& rng,
                                             const experience::NormStats& stats,
                                             const env::EnvParams& params = {});

// `step,d_loss,g_loss`
void save_loss_history(const std::vector<LossRecord>& history, const std::filesystem::path& path);

}  // namespace egan::gan
