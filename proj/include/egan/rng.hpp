#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace egan {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits, so results do not
// depend on the standard library's distribution implementation.
inline double unit_uniform(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_uniform(rng);
}

// Uniform index in [0, n). Multiply-shift; the bias is below 2^-64 * n.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Independent stream for one phase of a run, e.g. derive_rng(seed, kGanStream).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

}  // namespace egan
