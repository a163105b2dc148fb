#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

// Randomness used throughout the library.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are NOT portable across library
// implementations, so every conversion from raw 64-bit words to doubles or
// indices is done here by hand.

namespace msearch::rng {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer applied to (seed, stream). Used to give every case,
/// episode and worker its own reproducible engine.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  return Engine(derive_seed(seed, stream));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Uniform index in [0, n). n must be positive.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
  const auto idx = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

inline bool coin(Engine& eng, double p = 0.5) { return uniform01(eng) < p; }

}  // namespace msearch::rng
