#include "egan/mlp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "egan/errors.hpp"

namespace egan::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::softmax: return "softmax";
        case Activation::identity: return "identity";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "softmax") return Activation::softmax;
    if (name == "identity") return Activation::identity;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations)
    : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
        throw ConfigError("network needs at least an input and an output size");
    }
    for (auto s : sizes_) {
        if (s == 0) throw ConfigError("layer sizes must be positive");
    }
    if (activations.size() != sizes_.size() - 1) {
        throw ConfigError("expected " + std::to_string(sizes_.size() - 1) +
                          " activations, got " + std::to_string(activations.size()));
    }
    layers_.reserve(activations.size());
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
        layers_.push_back(Layer{Matrix(sizes_[i + 1], sizes_[i]),
                                std::vector<double>(sizes_[i + 1], 0.0), activations[i]});
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

Mlp init_network(const std::vector<std::size_t>& layer_sizes,
                 const std::vector<Activation>& activations, Rng& rng) {
    Mlp net(layer_sizes, activations);
    for (auto& layer : net.layers()) {
        const double fan_out = static_cast<double>(layer.weight.rows());
        const double fan_in = static_cast<double>(layer.weight.cols());
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : layer.weight.data()) w = uniform(rng, -bound, bound);
    }
    return net;
}

namespace {

void apply_activation(Activation act, Matrix& z) {
    switch (act) {
        case Activation::identity:
            break;
        case Activation::tanh:
            for (double& v : z.data()) v = std::tanh(v);
            break;
        case Activation::sigmoid:
            for (double& v : z.data()) {
                // Split on sign so exp() never overflows.
                if (v >= 0.0) {
                    v = 1.0 / (1.0 + std::exp(-v));
                } else {
                    const double e = std::exp(v);
                    v = e / (1.0 + e);
                }
            }
            break;
        case Activation::softmax:
            for (std::size_t r = 0; r < z.rows(); ++r) {
                auto row = z.row(r);
                const double mx = *std::max_element(row.begin(), row.end());
                double sum = 0.0;
                for (double& v : row) {
                    v = std::exp(v - mx);
                    sum += v;
                }
                for (double& v : row) v /= sum;
            }
            break;
    }
}

// dL/dz from dL/dy and y = act(z), in place on grad.
void activation_backward(Activation act, const Matrix& y, Matrix& grad) {
    switch (act) {
        case Activation::identity:
            break;
        case Activation::tanh: {
            auto g = grad.data();
            auto out = y.data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - out[i] * out[i];
            break;
        }
        case Activation::sigmoid: {
            auto g = grad.data();
            auto out = y.data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= out[i] * (1.0 - out[i]);
            break;
        }
        case Activation::softmax:
            for (std::size_t r = 0; r < grad.rows(); ++r) {
                auto g = grad.row(r);
                auto out = y.row(r);
                double dot = 0.0;
                for (std::size_t j = 0; j < g.size(); ++j) dot += g[j] * out[j];
                for (std::size_t j = 0; j < g.size(); ++j) g[j] = out[j] * (g[j] - dot);
            }
            break;
    }
}

}  // namespace

ForwardCache forward(const Mlp& net, const Matrix& input) {
    if (input.cols() != net.input_dim()) {
        throw ShapeError("forward: input has " + std::to_string(input.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
    }
    ForwardCache cache;
    cache.network = &net;
    cache.network_version = net.version();
    cache.outputs.reserve(net.layers().size() + 1);
    cache.outputs.push_back(input);
    for (const auto& layer : net.layers()) {
        Matrix z = matmul_transposed(cache.outputs.back(), layer.weight);
        for (std::size_t r = 0; r < z.rows(); ++r) {
            auto row = z.row(r);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
        }
        apply_activation(layer.activation, z);
        cache.outputs.push_back(std::move(z));
    }
    return cache;
}

Matrix predict(const Mlp& net, const Matrix& input) {
    return std::move(forward(net, input).outputs.back());
}

Gradients Gradients::zeros_like(const Mlp& net) {
    Gradients g;
    for (const auto& layer : net.layers()) {
        g.weight.emplace_back(layer.weight.rows(), layer.weight.cols());
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void Gradients::add(const Gradients& other, double scale) {
    if (other.weight.size() != weight.size()) throw ShapeError("gradient layer count mismatch");
    for (std::size_t l = 0; l < weight.size(); ++l) {
        auto dst = weight[l].data();
        auto src = other.weight[l].data();
        if (dst.size() != src.size()) throw ShapeError("gradient shape mismatch");
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
        if (bias[l].size() != other.bias[l].size()) throw ShapeError("gradient shape mismatch");
        for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += scale * other.bias[l][i];
    }
}

bool Gradients::all_zero() const {
    for (std::size_t l = 0; l < weight.size(); ++l) {
        for (double v : weight[l].data()) {
            if (v != 0.0) return false;
        }
        for (double v : bias[l]) {
            if (v != 0.0) return false;
        }
    }
    return true;
}

BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad) {
    if (cache.network != &net || cache.network_version != net.version() ||
        cache.outputs.size() != net.layers().size() + 1) {
        throw UsageError("backward: cache does not belong to the current network state");
    }
    const Matrix& out = cache.output();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
        throw ShapeError("backward: output gradient shape does not match forward output");
    }

    BackwardResult result;
    result.grads = Gradients::zeros_like(net);
    Matrix grad = output_grad;
    const auto& layers = net.layers();
    for (std::size_t l = layers.size(); l-- > 0;) {
        activation_backward(layers[l].activation, cache.outputs[l + 1], grad);
        result.grads.weight[l] = transposed_matmul(grad, cache.outputs[l]);
        auto& gb = result.grads.bias[l];
        for (std::size_t r = 0; r < grad.rows(); ++r) {
            auto row = grad.row(r);
            for (std::size_t j = 0; j < row.size(); ++j) gb[j] += row[j];
        }
        grad = matmul(grad, layers[l].weight);
    }
    result.input_grad = std::move(grad);
    return result;
}

void save_network(const Mlp& net, std::ostream& out) {
    out << "mlp v1 ";
    const auto& sizes = net.layer_sizes();
    for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? "," : "") << sizes[i];
    out << ' ';
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        out << (i ? "," : "") << to_string(net.layers()[i].activation);
    }
    out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& layer : net.layers()) {
        for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
            auto row = layer.weight.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << row[c];
            out << '\n';
        }
        for (std::size_t j = 0; j < layer.bias.size(); ++j) {
            out << (j ? " " : "") << layer.bias[j];
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

}  // namespace

Mlp load_network(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("missing mlp header", 1);
    std::istringstream hs(header);
    std::string magic, version, sizes_field, acts_field;
    if (!(hs >> magic >> version >> sizes_field >> acts_field) || magic != "mlp" ||
        version != "v1") {
        throw ParseError("expected 'mlp v1 <sizes> <activations>'", 1);
    }

    std::vector<std::size_t> sizes;
    std::vector<Activation> acts;
    try {
        for (const auto& s : split(sizes_field, ',')) sizes.push_back(std::stoul(s));
        for (const auto& a : split(acts_field, ',')) acts.push_back(parse_activation(a));
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad header: ") + e.what(), 1);
    }
    Mlp net = [&] {
        try {
            return Mlp(sizes, acts);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), 1);
        }
    }();

    std::size_t line_no = 1;
    auto read_values = [&](std::span<double> dst) {
        std::string line;
        ++line_no;
        if (!std::getline(in, line)) throw ParseError("unexpected end of file", line_no);
        std::istringstream ls(line);
        for (double& v : dst) {
            if (!(ls >> v)) throw ParseError("expected " + std::to_string(dst.size()) + " numbers",
                                             line_no);
        }
        std::string extra;
        if (ls >> extra) throw ParseError("trailing data '" + extra + "'", line_no);
    };
    for (auto& layer : net.layers()) {
        for (std::size_t r = 0; r < layer.weight.rows(); ++r) read_values(layer.weight.row(r));
        read_values(layer.bias);
    }
    return net;
}

void save_network(const Mlp& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    save_network(net, out);
}

Mlp load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return load_network(in);
}

}  // namespace egan::nn
