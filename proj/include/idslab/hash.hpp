#pragma once

#include <cstdint>

#include "idslab/lattice.hpp"

namespace idslab {

// Counter-based randomness: every random quantity is a pure function of
// (stream, lattice cell), so any window can be sampled independently and a
// translated window reproduces exactly the same numbers.

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for a fixed label ("metric", "potential", ...).
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t label) {
  return mix64(mix64(seed) ^ mix64(label ^ 0x5851f42d4c957f2dULL));
}

/// i-th seed of the family generated by a base seed.
constexpr std::uint64_t nth_seed(std::uint64_t base, std::uint64_t i) {
  return mix64(base ^ mix64(i + 0x2545f4914f6cdd1dULL));
}

constexpr std::uint64_t hash_cell(std::uint64_t stream, const Coord& cell, int dim) {
  std::uint64_t h = mix64(stream);
  for (int i = 0; i < dim; ++i) {
    h = mix64(h ^ static_cast<std::uint64_t>(cell[i]));
  }
  return h;
}

/// Top 53 bits as a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr std::uint64_t kMetricLabel = 0x6d65747269630001ULL;
inline constexpr std::uint64_t kPotentialLabel = 0x706f74656e740002ULL;

}  // namespace idslab
