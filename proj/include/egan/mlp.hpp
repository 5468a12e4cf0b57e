#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "egan/matrix.hpp"
#include "egan/rng.hpp"

namespace egan::nn {

enum class Activation { tanh, sigmoid, softmax, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct Layer {
    Matrix weight;              // fan_out x fan_in
    std::vector<double> bias;   // fan_out
    Activation activation = Activation::identity;
};

// Fully connected feed-forward network. layer_sizes() = {input, hidden..., output};
// layer i maps layer_sizes()[i] -> layer_sizes()[i + 1].
class Mlp {
public:
    Mlp() = default;
    // All parameters zero. Throws ConfigError on < 2 sizes, a zero size, or an
    // activation count different from the number of layers.
    Mlp(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations);

    const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t output_dim() const { return sizes_.back(); }
    std::size_t parameter_count() const;

    std::vector<Layer>& layers() noexcept { return layers_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    // Bumped by every optimizer update so caches from before the update are
    // rejected by backward().
    std::uint64_t version() const noexcept { return version_; }
    void mark_modified() noexcept { ++version_; }

    friend bool operator==(const Mlp& a, const Mlp& b) {
        return a.sizes_ == b.sizes_ && a.layers_.size() == b.layers_.size() &&
               std::equal(a.layers_.begin(), a.layers_.end(), b.layers_.begin(),
                          [](const Layer& x, const Layer& y) {
                              return x.activation == y.activation && x.weight == y.weight &&
                                     x.bias == y.bias;
                          });
    }

private:
    std::vector<std::size_t> sizes_;
    std::vector<Layer> layers_;
    std::uint64_t version_ = 0;
};

// Xavier-uniform weights, zero biases.
Mlp init_network(const std::vector<std::size_t>& layer_sizes,
                 const std::vector<Activation>& activations, Rng& rng);

// Activations of every layer for one forward pass; outputs[0] is the input.
struct ForwardCache {
    std::vector<Matrix> outputs;
    const Mlp* network = nullptr;
    std::uint64_t network_version = 0;

    const Matrix& output() const { return outputs.back(); }
};

ForwardCache forward(const Mlp& net, const Matrix& input);
Matrix predict(const Mlp& net, const Matrix& input);

// Parameter-shaped container; also used for optimizer moments.
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;

    static Gradients zeros_like(const Mlp& net);
    void add(const Gradients& other, double scale = 1.0);
    bool all_zero() const;
};

struct BackwardResult {
    Gradients grads;
    Matrix input_grad;
};

// Reverse pass given dLoss/dOutput (same shape as cache.output()).
BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad);

// Visit (parameter, gradient) pairs in serialization order.
template <typename F>
void for_each_parameter(Mlp& net, const Gradients& grads, F&& fn) {
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto w = layers[l].weight.data();
        auto gw = grads.weight[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) fn(w[i], gw[i]);
        auto& b = layers[l].bias;
        const auto& gb = grads.bias[l];
        for (std::size_t i = 0; i < b.size(); ++i) fn(b[i], gb[i]);
    }
}

// Text checkpoint: header `mlp v1 <sizes> <activations>` (comma separated),
// then one line per weight row and one bias line per layer.
void save_network(const Mlp& net, std::ostream& out);
Mlp load_network(std::istream& in);
void save_network(const Mlp& net, const std::filesystem::path& path);
Mlp load_network(const std::filesystem::path& path);

}  // namespace egan::nn
