#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ratedev {

/// Seeded random stream with platform-independent draws.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so the draws below are built directly
/// on the engine's raw output.
class Rng {
 public:
  /// Independent stream `stream` of master seed `seed`.
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  /// Uniform integer on [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// `count` distinct indices from [0, population), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ratedev
