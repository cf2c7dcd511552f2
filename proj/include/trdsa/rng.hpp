#pragma once

#include <cstdint>

namespace trdsa::sim {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

/// Reproducible per-run random stream.
///
/// The stream for (seed, run_index) is SplitMix64 started from
/// state = mix(seed ^ mix(run_index + 0x9E3779B97F4A7C15)), incrementing the
/// state by the golden gamma 0x9E3779B97F4A7C15 before each output. Uniform
/// doubles take the top 53 bits. Everything is integer arithmetic, so the
/// draws are bit-identical on every platform.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr RngStream(std::uint64_t seed, std::uint64_t run_index)
      : state_(splitmix64_mix(seed ^ splitmix64_mix(run_index + kGamma))) {}

  constexpr std::uint64_t next() {
    state_ += kGamma;
    return splitmix64_mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11U) * 0x1.0p-53; }

  /// True with probability p.
  constexpr bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

inline RngStream rng_stream(std::uint64_t seed, std::uint64_t run_index) { return RngStream(seed, run_index); }

}  // namespace trdsa::sim
