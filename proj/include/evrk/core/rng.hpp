// Deterministic randomness utilities.
//
// All stochastic behaviour in the library flows through these helpers so that
// a fixed seed yields bit-identical output across platforms and thread counts.
// std::uniform_real_distribution and friends are implementation-defined, so the
// mappings from raw engine output to usable values are spelled out here.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace evrk::core {

using Engine = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
[[nodiscard]] inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
[[nodiscard]] inline double uniform_range(Engine& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n). Rejection-free modulo reduction is biased for
// large n, so use Lemire-style rejection on the 64-bit draw.
[[nodiscard]] inline std::uint64_t uniform_below(Engine& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

// In-place Fisher-Yates shuffle with the explicit bounded-draw mapping.
template <typename T>
void shuffle_in_place(std::vector<T>& v, Engine& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Derives an independent engine for a (seed, stream, index) triple.
// SplitMix64 scrambling keeps nearby indices uncorrelated.
[[nodiscard]] inline Engine derived_engine(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Engine(z);
}

}  // namespace evrk::core
