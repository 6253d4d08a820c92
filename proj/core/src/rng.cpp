#include "karmats/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace karmats {

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Rejection sampling on the top of the range keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

int Rng::integer(int lo, int hi) {
  return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
}

double Rng::normal(double mean, double stddev) {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double NoiseStream::uniform(unsigned draw) const noexcept {
  const std::uint64_t slot = splitmix64(key_ ^ splitmix64(counter_));
  return to_unit(splitmix64(slot + 0x9e3779b97f4a7c15ULL * (draw + 1)));
}

}  // namespace karmats
