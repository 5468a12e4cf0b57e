#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "egan/cartpole.hpp"
#include "egan/matrix.hpp"

namespace egan::experience {

// (s_t, a, s_{t+1}, r, done).
using Quadruplet = env::Transition;

inline constexpr std::size_t kStateDim = 4;
inline constexpr std::size_t kHalfDim = 5;               // x1 = (s_t, a), x2 = (s_{t+1}, r)
inline constexpr std::size_t kEncodedDim = 2 * kHalfDim;

// Per state-dimension range over every s_t and s_{t+1} in a buffer. One range
// serves both halves so x1 and x2 share a coordinate system.
struct NormStats {
    std::array<double, kStateDim> min{};
    std::array<double, kStateDim> max{};

    static NormStats from(std::span<const Quadruplet> data);

    friend bool operator==(const NormStats&, const NormStats&) = default;
};

struct EncodedSample {
    std::array<double, kEncodedDim> x{};

    std::span<const double, kHalfDim> x1() const { return std::span(x).first<kHalfDim>(); }
    std::span<const double, kHalfDim> x2() const { return std::span(x).last<kHalfDim>(); }
};

// States scale to [-1, 1] per dimension (a zero-range dimension is only
// centred, not scaled); action {0, 1} -> {-1, +1}; reward r -> 2(r - 0.5).
EncodedSample encode(const Quadruplet& q, const NormStats& stats);

// Total inverse of encode for arbitrary generator output: action by sign
// (0 maps to 1), reward clamped to [0, 1] then rounded, done from the
// geometric bounds of s_{t+1}.
Quadruplet decode(std::span<const double> x, const NormStats& stats,
                  const env::EnvParams& params = {});

double encode_state_component(double value, std::size_t dim, const NormStats& stats);
double decode_state_component(double value, std::size_t dim, const NormStats& stats);

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = std::numeric_limits<std::size_t>::max());

    // Evicts the oldest transition when full.
    void push(const Quadruplet& q);

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t capacity() const noexcept { return capacity_; }
    const std::vector<Quadruplet>& items() const noexcept { return items_; }
    const Quadruplet& operator[](std::size_t i) const { return items_[i]; }

    // Real environment transitions that went through this buffer, evicted ones included.
    std::size_t real_samples() const noexcept { return real_samples_; }

    NormStats stats() const { return NormStats::from(items_); }

    // n x 10 matrix of encoded samples.
    nn::Matrix encoded(const NormStats& stats) const;

private:
    std::size_t capacity_;
    std::size_t real_samples_ = 0;
    std::vector<Quadruplet> items_;
};

ReplayBuffer collect_random(env::CartPole& env, int n_episodes, Rng& rng);

inline constexpr const char* kCsvHeader =
    "x,x_dot,theta,theta_dot,a,nx,nx_dot,ntheta,ntheta_dot,r,done";

void save_csv(const ReplayBuffer& buffer, const std::filesystem::path& path);
// Throws ParseError naming the 1-based file line of the first bad row.
ReplayBuffer load_csv(const std::filesystem::path& path);

// `<dir>/<stem>.stats.csv` next to a dataset file.
std::filesystem::path stats_sidecar_path(const std::filesystem::path& dataset);
void save_stats(const NormStats& stats, const std::filesystem::path& path);
NormStats load_stats(const std::filesystem::path& path);

}  // namespace egan::experience
