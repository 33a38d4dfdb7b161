#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dmad {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed splitting: derive_seed(root, {a, b, ...}) folds each stream id into the
// root with state = mix64(state ^ mix64(id + c)). Gives every sample, epoch
// and grid cell an independent rng stream regardless of processing order.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> stream);

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> stream) {
    return Rng(derive_seed(root, stream));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace dmad
