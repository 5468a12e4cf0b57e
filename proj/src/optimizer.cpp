#include "egan/optimizer.hpp"

#include <cmath>
#include <string>

#include "egan/errors.hpp"

namespace egan::nn {

std::string_view to_string(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate) {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning rate must be finite and non-negative");
    }
    OptimizerState s;
    s.kind = kind;
    s.learning_rate = learning_rate;
    return s;
}

namespace {

void check_shapes(const Mlp& net, const Gradients& grads) {
    const auto& layers = net.layers();
    if (grads.weight.size() != layers.size() || grads.bias.size() != layers.size()) {
        throw ShapeError("optimizer: gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (grads.weight[l].rows() != layers[l].weight.rows() ||
            grads.weight[l].cols() != layers[l].weight.cols() ||
            grads.bias[l].size() != layers[l].bias.size()) {
            throw ShapeError("optimizer: gradient shape mismatch in layer " + std::to_string(l));
        }
    }
}

}  // namespace

void optimizer_step(Mlp& net, const Gradients& grads, OptimizerState& state) {
    check_shapes(net, grads);
    const double lr = state.learning_rate;
    if (state.kind == OptimizerKind::sgd) {
        for_each_parameter(net, grads, [lr](double& p, double g) { p -= lr * g; });
        ++state.step;
        net.mark_modified();
        return;
    }

    if (state.m.weight.empty()) {
        state.m = Gradients::zeros_like(net);
        state.v = Gradients::zeros_like(net);
    }
    ++state.step;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double eps = state.epsilon;

    auto& layers = net.layers();
    auto update = [&](std::span<double> p, std::span<const double> g, std::span<double> m,
                      std::span<double> v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update(layers[l].weight.data(), grads.weight[l].data(), state.m.weight[l].data(),
               state.v.weight[l].data());
        update(layers[l].bias, grads.bias[l], state.m.bias[l], state.v.bias[l]);
    }
    net.mark_modified();
}

}  // namespace egan::nn
