#pragma once

#include <cstdint>

namespace smc {

/// splitmix64: tiny, portable, deterministic across platforms. Used both as
/// the simulation stream generator and as the child-seed derivation.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

/// Child seed for replication r of an experiment: the r-th output of a
/// splitmix64 stream seeded with the master seed. Closed form, so parallel
/// and serial runs derive identical per-replication streams.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t r) {
  std::uint64_t z = master + (r + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace smc
