#pragma once

#include <cstdint>

namespace leap {

/// SplitMix64 stream. Every random draw in the project (weight init, corpus
/// sampling, corruption) goes through this generator so that runs are
/// reproducible bit-for-bit across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) from the top 53 bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Index in [0, n) by inverse-CDF over equal weights.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n));
  }

 private:
  std::uint64_t state_;
};

/// Derives a per-item seed from a base seed, for corpus-style fan-out.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  SplitMix64 rng(base ^ (index * 0x9E3779B97F4A7C15ULL + 1));
  return rng.next_u64();
}

}  // namespace leap
