#include "smot/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smot {

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n <= 1) return 0;
  const auto k = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  return std::min(k, n - 1);
}

double Rng::normal(double mean, double sigma) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + sigma * spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return mean + sigma * r * std::cos(theta);
}

std::uint64_t Rng::poisson(double mean) {
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double chunk = std::min(mean, 30.0);
    mean -= chunk;
    const double limit = std::exp(-chunk);
    double product = uniform01();
    while (product > limit) {
      ++total;
      product *= uniform01();
    }
  }
  return total;
}

}  // namespace smot
