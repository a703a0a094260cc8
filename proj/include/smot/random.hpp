#pragma once

#include <cstdint>
#include <random>

namespace smot {

/// Seeded generator with a fixed, platform-independent algorithm: the
/// standard 64-bit Mersenne Twister (std::mt19937_64) as the bit source, and
/// hand-written transforms on top of it, because the distributions in
/// <random> are implementation-defined.
///
///   uniform01   top 53 bits / 2^53
///   normal      Box-Muller (pairs cached)
///   poisson     Knuth product method in chunks of mean <= 30
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }
  double normal(double mean = 0.0, double sigma = 1.0);
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smot
