#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace minigpt {

/// Deterministic, platform-independent random stream (xoshiro256** seeded
/// through splitmix64). All distributions are implemented here rather than
/// through <random> so that a seed reproduces the same draws everywhere.
class RandomState {
 public:
  explicit RandomState(std::uint64_t seed = 42);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Unbiased integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Gaussian draw via Box-Muller. Draws come in pairs; the second value of
  /// each pair is cached and returned by the next call.
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Independent child stream; advances this stream by one draw.
  RandomState split();

  bool operator==(const RandomState&) const = default;

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_;
};

}  // namespace minigpt
