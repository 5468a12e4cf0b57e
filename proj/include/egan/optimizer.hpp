#pragma once

#include <cstdint>
#include <string_view>

#include "egan/mlp.hpp"

namespace egan::nn {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    // Adam moments, sized on the first step.
    Gradients m;
    Gradients v;
};

// Throws ConfigError unless learning_rate >= 0. A zero rate is allowed and
// leaves parameters untouched.
OptimizerState make_optimizer(OptimizerKind kind, double learning_rate);

// SGD: p -= lr * g. Adam: bias-corrected moments, p -= lr * m_hat / (sqrt(v_hat) + eps).
void optimizer_step(Mlp& net, const Gradients& grads, OptimizerState& state);

}  // namespace egan::nn
