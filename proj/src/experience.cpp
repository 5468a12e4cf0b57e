#include "egan/experience.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "egan/errors.hpp"
#include "egan/text.hpp"

namespace egan::experience {

namespace {

std::array<double, kStateDim> as_array(const env::CartPoleState& s) {
    return {s.x, s.x_dot, s.theta, s.theta_dot};
}

env::CartPoleState from_array(std::span<const double> v) {
    return {v[0], v[1], v[2], v[3]};
}


double parse_double(const std::string& field, std::size_t line) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw ParseError("not a number: '" + field + "'", line);
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

NormStats NormStats::from(std::span<const Quadruplet> data) {
    if (data.empty()) {
        throw UsageError("normalization statistics need at least one transition");
    }
    NormStats st;
    st.min.fill(std::numeric_limits<double>::infinity());
    st.max.fill(-std::numeric_limits<double>::infinity());
    for (const auto& q : data) {
        for (const auto& s : {as_array(q.state), as_array(q.next)}) {
            for (std::size_t d = 0; d < kStateDim; ++d) {
                st.min[d] = std::min(st.min[d], s[d]);
                st.max[d] = std::max(st.max[d], s[d]);
            }
        }
    }
    return st;
}

double encode_state_component(double value, std::size_t dim, const NormStats& stats) {
    const double mid = 0.5 * (stats.max[dim] + stats.min[dim]);
    const double half = 0.5 * (stats.max[dim] - stats.min[dim]);
    return half > 0.0 ? (value - mid) / half : value - mid;
}

double decode_state_component(double value, std::size_t dim, const NormStats& stats) {
    const double mid = 0.5 * (stats.max[dim] + stats.min[dim]);
    const double half = 0.5 * (stats.max[dim] - stats.min[dim]);
    return half > 0.0 ? value * half + mid : value + mid;
}

EncodedSample encode(const Quadruplet& q, const NormStats& stats) {
    EncodedSample e;
    const auto s = as_array(q.state);
    const auto n = as_array(q.next);
    for (std::size_t d = 0; d < kStateDim; ++d) {
        e.x[d] = encode_state_component(s[d], d, stats);
        e.x[kHalfDim + d] = encode_state_component(n[d], d, stats);
    }
    e.x[kStateDim] = q.action == 1 ? 1.0 : -1.0;
    e.x[kHalfDim + kStateDim] = (q.reward - 0.5) * 2.0;
    return e;
}

Quadruplet decode(std::span<const double> x, const NormStats& stats,
                  const env::EnvParams& params) {
    if (x.size() != kEncodedDim) {
        throw ShapeError("decode expects " + std::to_string(kEncodedDim) + " values");
    }
    std::array<double, kStateDim> s{};
    std::array<double, kStateDim> n{};
    for (std::size_t d = 0; d < kStateDim; ++d) {
        s[d] = decode_state_component(x[d], d, stats);
        n[d] = decode_state_component(x[kHalfDim + d], d, stats);
    }
    Quadruplet q;
    q.state = from_array(s);
    q.next = from_array(n);
    q.action = x[kStateDim] >= 0.0 ? 1 : 0;
    const double r = std::clamp(x[kHalfDim + kStateDim] / 2.0 + 0.5, 0.0, 1.0);
    q.reward = r >= 0.5 ? 1.0 : 0.0;
    q.done = env::out_of_bounds(params, q.next);
    return q;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(const Quadruplet& q) {
    if (items_.size() == capacity_) items_.erase(items_.begin());
    items_.push_back(q);
    ++real_samples_;
}

nn::Matrix ReplayBuffer::encoded(const NormStats& stats) const {
    nn::Matrix m(items_.size(), kEncodedDim);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const auto e = encode(items_[i], stats);
        std::copy(e.x.begin(), e.x.end(), m.row(i).begin());
    }
    return m;
}

ReplayBuffer collect_random(env::CartPole& env, int n_episodes, Rng& rng) {
    if (n_episodes < 1) throw ConfigError("collect_random needs at least one episode");
    ReplayBuffer buffer;
    const auto policy = env::random_policy();
    for (int e = 0; e < n_episodes; ++e) {
        for (const auto& t : env::run_episode(env, policy, rng).transitions) buffer.push(t);
    }
    return buffer;
}

void save_csv(const ReplayBuffer& buffer, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << kCsvHeader << '\n';
    for (const auto& q : buffer.items()) {
        for (double v : as_array(q.state)) out << format_double(v) << ',';
        out << q.action << ',';
        for (double v : as_array(q.next)) out << format_double(v) << ',';
        out << format_double(q.reward) << ',' << (q.done ? 1 : 0) << '\n';
    }
}

ReplayBuffer load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kCsvHeader) {
        throw ParseError(std::string("expected header '") + kCsvHeader + "'", 1);
    }
    ReplayBuffer buffer;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 11) {
            throw ParseError("expected 11 fields, got " + std::to_string(cells.size()), line_no);
        }
        std::array<double, 11> v{};
        for (std::size_t i = 0; i < cells.size(); ++i) v[i] = parse_double(cells[i], line_no);
        if (v[4] != 0.0 && v[4] != 1.0) throw ParseError("action must be 0 or 1", line_no);
        if (v[10] != 0.0 && v[10] != 1.0) throw ParseError("done must be 0 or 1", line_no);
        Quadruplet q;
        q.state = from_array(std::span(v).subspan(0, 4));
        q.action = static_cast<int>(v[4]);
        q.next = from_array(std::span(v).subspan(5, 4));
        q.reward = v[9];
        q.done = v[10] == 1.0;
        buffer.push(q);
    }
    return buffer;
}

std::filesystem::path stats_sidecar_path(const std::filesystem::path& dataset) {
    auto p = dataset;
    p.replace_filename(dataset.stem().string() + ".stats.csv");
    return p;
}

void save_stats(const NormStats& stats, const std::filesystem::path& path) {
    static constexpr const char* kNames[] = {"x", "x_dot", "theta", "theta_dot"};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "dim,min,max\n";
    for (std::size_t d = 0; d < kStateDim; ++d) {
        out << kNames[d] << ',' << format_double(stats.min[d]) << ','
            << format_double(stats.max[d]) << '\n';
    }
}

NormStats load_stats(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "dim,min,max") {
        throw ParseError("expected header 'dim,min,max'", 1);
    }
    NormStats st;
    for (std::size_t d = 0; d < kStateDim; ++d) {
        const std::size_t line_no = d + 2;
        if (!std::getline(in, line)) throw ParseError("missing dimension row", line_no);
        const auto cells = split_csv(strip_cr(line));
        if (cells.size() != 3) throw ParseError("expected 3 fields", line_no);
        st.min[d] = parse_double(cells[1], line_no);
        st.max[d] = parse_double(cells[2], line_no);
    }
    return st;
}

}  // namespace egan::experience
