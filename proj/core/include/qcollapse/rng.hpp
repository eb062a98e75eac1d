#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qcollapse {

/// Seedable, splittable random stream.
///
/// Children are derived from the parent's seed and a name or index, never
/// from the parent's consumed state, so a child stream is the same no matter
/// how many draws the parent has made. Concurrent workers each take a split.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::string_view name = {});

  RngStream split(std::string_view name) const;
  RngStream split(std::uint64_t index) const;

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal deviate.
  double normal();
  /// Exponential deviate with the given rate (> 0).
  double exponential(double rate);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace qcollapse
