#pragma once

#include <cstdint>
#include <optional>

#include "breg/solver.hpp"
#include "breg/types.hpp"

namespace breg::apps {

/// Poisson deblurring: minimise over u > 0
///
///   sum (A u) - b log(A u)  +  lambda/2 sum log(1 + rho |(D u)_ij|^2)
///
/// with A a circular convolution and D forward differences (zero on the last
/// row / column).
struct DeblurInstance {
  /// Observed counts, strictly positive.
  Matrix b;
  /// Nonnegative kernel summing to 1, centred at (rows/2, cols/2).
  Matrix kernel;
  double lambda = 1.0;
  double rho = 1e-3;
  std::optional<Matrix> truth;
  double peak = 255.0;
};

/// Throws UsageError unless b > 0, the kernel is nonnegative, sums to 1 and
/// fits inside the image, and lambda, rho >= 0.
void validate(const DeblurInstance& inst);

/// (k * u)(i, j) = sum_{p,q} k(p, q) u(i + p - cp, j + q - cq), indices mod size.
Matrix circular_convolve(const Matrix& u, const Matrix& kernel);
/// Adjoint of circular_convolve for the same kernel.
Matrix circular_convolve_adjoint(const Matrix& v, const Matrix& kernel);

/// Normalised size x size Gaussian with standard deviation sigma.
Matrix gaussian_kernel(int size, double sigma);

struct ValueGradient {
  double value = 0.0;
  Matrix gradient;
};

/// Data term and its gradient A^T(1 - b / Au). Throws DomainError if Au <= 0
/// anywhere.
ValueGradient kl_value_and_gradient(const DeblurInstance& inst, const Matrix& u);
/// Regulariser and its gradient lambda D^T[rho Du / (1 + rho |Du|^2)].
ValueGradient logpenalty_value_and_gradient(const DeblurInstance& inst, const Matrix& u);

/// Full objective; +inf unless u > 0.
double deblur_objective(const DeblurInstance& inst, const Matrix& u);

/// 10 log10(peak^2 / MSE), capped at 99 dB when MSE < 1e-12.
double psnr(const Matrix& reference, const Matrix& image, double peak);

/// n x n piecewise-constant test image with values in [0.1 peak, 0.9 peak],
/// blurred with a 5 x 5 Gaussian (sigma 1) and corrupted by Poisson noise.
/// b is floored at 1e-6 so the data stay strictly positive.
DeblurInstance make_synthetic_deblur(int n, std::uint64_t seed, double peak = 255.0);

struct DeblurResult {
  Matrix u;
  SolveResult solve;
  std::optional<double> psnr;
  std::optional<double> input_psnr;
};

/// Line-searched mirror steps u / (1 + tau g u) in the Burg geometry,
/// started at max(b, 1e-6). When some 1 + tau g u <= 1e-8 the scale is
/// halved for that iteration until every denominator clears the guard.
DeblurResult run_deblur(const DeblurInstance& inst, const SolverConfig& cfg, const TraceSink& sink = {});

}  // namespace breg::apps
