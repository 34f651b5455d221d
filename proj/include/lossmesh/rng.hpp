#pragma once

#include <cstdint>
#include <random>

namespace lossmesh {

// All stochastic code draws from std::mt19937_64, whose output sequence is
// fixed by the standard. Distributions on top of it come from Boost.Random,
// whose algorithms do not vary between standard library implementations.
using Rng = std::mt19937_64;

// Independent streams used inside one simulation replication.
enum class Stream : std::uint64_t {
  Arrivals = 1,
  Routing = 2,
  Service = 3,
  InitialPoint = 4,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for (base seed, replication index, stream). Replication r of a run
// always sees the same three streams, no matter which worker executes it.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication,
                                    Stream stream) noexcept {
  return mix64(mix64(mix64(seed) ^ replication) ^ static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t replication, Stream stream) {
  return Rng(derive_seed(seed, replication, stream));
}

}  // namespace lossmesh
