#pragma once

#include <cstdint>

namespace breg {

/// SplitMix64 generator. The only entropy source in the library.
///
/// Update rule, per call:
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
/// Uniform doubles take the top 53 bits: (next() >> 11) * 2^-53, in [0, 1).
/// Every derived distribution below is written out explicitly so a port in
/// another language can reproduce instance synthesis bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal by Box-Muller (two uniforms per draw, no caching).
  double normal();
  /// Laplace(0, scale) by inverse CDF of one uniform.
  double laplace(double scale);
  /// Poisson(mean) by sequential CDF inversion; means above 200 are split
  /// into equal chunks and summed.
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t state_;
};

}  // namespace breg
