#include "breg/rng.hpp"

#include <cmath>
#include <numbers>

namespace breg {

namespace {

constexpr double kTwoPow53 = 9007199254740992.0;

// Uniform in (0, 1); never returns 0, so logarithms stay finite.
double open_uniform(SplitMix64& g) {
  return (static_cast<double>(g.next() >> 11) + 0.5) / kTwoPow53;
}

}  // namespace

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) / kTwoPow53;
}

double SplitMix64::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double SplitMix64::normal() {
  const double u1 = open_uniform(*this);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SplitMix64::laplace(double scale) {
  const double v = open_uniform(*this) - 0.5;
  const double magnitude = -scale * std::log(1.0 - 2.0 * std::abs(v));
  return v < 0 ? -magnitude : magnitude;
}

std::uint64_t SplitMix64::poisson(double mean) {
  if (!(mean > 0)) return 0;
  const int chunks = static_cast<int>(std::ceil(mean / 200.0));
  const double part = mean / chunks;
  std::uint64_t total = 0;
  for (int c = 0; c < chunks; ++c) {
    const double u = uniform();
    double p = std::exp(-part);
    double cdf = p;
    std::uint64_t k = 0;
    // The cap only matters if u lands in the last ulp of the CDF.
    while (u > cdf && k < 100000) {
      ++k;
      p *= part / static_cast<double>(k);
      cdf += p;
    }
    total += k;
  }
  return total;
}

}  // namespace breg
