#include "breg/apps/deblur.hpp"

#include <algorithm>
#include <cmath>

#include "breg/errors.hpp"
#include "breg/rng.hpp"
#include "breg/subsolvers.hpp"

namespace breg::apps {

namespace {

constexpr double kDenominatorGuard = 1e-8;

Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index r = i % n;
  return r < 0 ? r + n : r;
}

void check_shape(const DeblurInstance& inst, const Matrix& u) {
  if (u.rows() != inst.b.rows() || u.cols() != inst.b.cols()) {
    throw UsageError("image shape does not match the data");
  }
}

Matrix as_image(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector as_vector(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace

void validate(const DeblurInstance& inst) {
  if (inst.b.size() == 0) throw UsageError("empty image");
  if (!inst.b.allFinite() || !(inst.b.array() > 0).all()) {
    throw UsageError("observed image must be strictly positive");
  }
  if (inst.kernel.size() == 0 || inst.kernel.rows() > inst.b.rows() || inst.kernel.cols() > inst.b.cols()) {
    throw UsageError("kernel must be non-empty and fit inside the image");
  }
  if (!(inst.kernel.array() >= 0).all() || std::abs(inst.kernel.sum() - 1.0) > 1e-9) {
    throw UsageError("kernel must be nonnegative and sum to 1");
  }
  if (!(inst.lambda >= 0) || !(inst.rho >= 0)) throw UsageError("lambda and rho must be nonnegative");
  if (!(inst.peak > 0)) throw UsageError("peak must be positive");
  if (inst.truth) check_shape(inst, *inst.truth);
}

Matrix circular_convolve(const Matrix& u, const Matrix& kernel) {
  const Eigen::Index nx = u.rows();
  const Eigen::Index ny = u.cols();
  const Eigen::Index cp = kernel.rows() / 2;
  const Eigen::Index cq = kernel.cols() / 2;
  Matrix out = Matrix::Zero(nx, ny);
  for (Eigen::Index q = 0; q < kernel.cols(); ++q) {
    for (Eigen::Index p = 0; p < kernel.rows(); ++p) {
      const double w = kernel(p, q);
      if (w == 0.0) continue;
      for (Eigen::Index j = 0; j < ny; ++j) {
        const Eigen::Index jj = wrap(j + q - cq, ny);
        for (Eigen::Index i = 0; i < nx; ++i) out(i, j) += w * u(wrap(i + p - cp, nx), jj);
      }
    }
  }
  return out;
}

Matrix circular_convolve_adjoint(const Matrix& v, const Matrix& kernel) {
  const Eigen::Index nx = v.rows();
  const Eigen::Index ny = v.cols();
  const Eigen::Index cp = kernel.rows() / 2;
  const Eigen::Index cq = kernel.cols() / 2;
  Matrix out = Matrix::Zero(nx, ny);
  for (Eigen::Index q = 0; q < kernel.cols(); ++q) {
    for (Eigen::Index p = 0; p < kernel.rows(); ++p) {
      const double w = kernel(p, q);
      if (w == 0.0) continue;
      for (Eigen::Index j = 0; j < ny; ++j) {
        const Eigen::Index jj = wrap(j + q - cq, ny);
        for (Eigen::Index i = 0; i < nx; ++i) out(wrap(i + p - cp, nx), jj) += w * v(i, j);
      }
    }
  }
  return out;
}

Matrix gaussian_kernel(int size, double sigma) {
  if (size < 1 || !(sigma > 0)) throw UsageError("kernel needs size >= 1 and sigma > 0");
  Matrix k(size, size);
  const double c = (size - 1) / 2.0;
  for (int q = 0; q < size; ++q) {
    for (int p = 0; p < size; ++p) {
      const double r2 = (p - c) * (p - c) + (q - c) * (q - c);
      k(p, q) = std::exp(-r2 / (2.0 * sigma * sigma));
    }
  }
  return k / k.sum();
}

ValueGradient kl_value_and_gradient(const DeblurInstance& inst, const Matrix& u) {
  check_shape(inst, u);
  const Matrix au = circular_convolve(u, inst.kernel);
  if (!(au.array() > 0).all()) throw DomainError("blurred image must be strictly positive");
  ValueGradient out;
  out.value = (au.array() - inst.b.array() * au.array().log()).sum();
  const Matrix ratio = (1.0 - inst.b.array() / au.array()).matrix();
  out.gradient = circular_convolve_adjoint(ratio, inst.kernel);
  return out;
}

ValueGradient logpenalty_value_and_gradient(const DeblurInstance& inst, const Matrix& u) {
  check_shape(inst, u);
  const Eigen::Index nx = u.rows();
  const Eigen::Index ny = u.cols();
  ValueGradient out;
  out.gradient = Matrix::Zero(nx, ny);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < ny; ++j) {
    for (Eigen::Index i = 0; i < nx; ++i) {
      const double d1 = i + 1 < nx ? u(i + 1, j) - u(i, j) : 0.0;
      const double d2 = j + 1 < ny ? u(i, j + 1) - u(i, j) : 0.0;
      const double s = d1 * d1 + d2 * d2;
      sum += std::log1p(inst.rho * s);
      const double w = inst.lambda * inst.rho / (1.0 + inst.rho * s);
      if (i + 1 < nx) {
        out.gradient(i + 1, j) += w * d1;
        out.gradient(i, j) -= w * d1;
      }
      if (j + 1 < ny) {
        out.gradient(i, j + 1) += w * d2;
        out.gradient(i, j) -= w * d2;
      }
    }
  }
  out.value = 0.5 * inst.lambda * sum;
  return out;
}

double deblur_objective(const DeblurInstance& inst, const Matrix& u) {
  check_shape(inst, u);
  if (!u.allFinite()) throw UsageError("non-finite image");
  if (!(u.array() > 0).all()) return kInfinity;
  return kl_value_and_gradient(inst, u).value + logpenalty_value_and_gradient(inst, u).value;
}

double psnr(const Matrix& reference, const Matrix& image, double peak) {
  if (reference.rows() != image.rows() || reference.cols() != image.cols()) {
    throw UsageError("PSNR needs images of equal shape");
  }
  if (!(peak > 0)) throw UsageError("peak must be positive");
  if (reference.size() == 0) throw UsageError("PSNR of empty images");
  const double mse = (reference - image).squaredNorm() / static_cast<double>(reference.size());
  if (mse < 1e-12) return 99.0;
  return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

DeblurInstance make_synthetic_deblur(int n, std::uint64_t seed, double peak) {
  if (n < 8) throw UsageError("synthetic image needs n >= 8");
  if (!(peak > 0)) throw UsageError("peak must be positive");
  SplitMix64 rng(seed);
  Matrix truth = Matrix::Constant(n, n, 0.2 * peak);
  // Random axis-aligned rectangles, then one disk.
  for (int r = 0; r < 6; ++r) {
    const int i0 = static_cast<int>(rng.uniform(0.0, n * 0.7));
    const int j0 = static_cast<int>(rng.uniform(0.0, n * 0.7));
    const int h = 4 + static_cast<int>(rng.uniform(0.0, n * 0.3));
    const int w = 4 + static_cast<int>(rng.uniform(0.0, n * 0.3));
    const double v = rng.uniform(0.1, 0.9) * peak;
    truth.block(i0, j0, std::min(h, n - i0), std::min(w, n - j0)).setConstant(v);
  }
  const double ci = rng.uniform(0.3, 0.7) * n;
  const double cj = rng.uniform(0.3, 0.7) * n;
  const double radius = rng.uniform(0.1, 0.2) * n;
  const double disk = rng.uniform(0.1, 0.9) * peak;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= radius * radius) truth(i, j) = disk;
    }
  }

  DeblurInstance inst;
  inst.kernel = gaussian_kernel(5, 1.0);
  inst.peak = peak;
  const Matrix blurred = circular_convolve(truth, inst.kernel);
  inst.b.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      inst.b(i, j) = std::max(static_cast<double>(rng.poisson(blurred(i, j))), 1e-6);
    }
  }
  inst.truth = std::move(truth);
  return inst;
}

DeblurResult run_deblur(const DeblurInstance& inst, const SolverConfig& cfg, const TraceSink& sink) {
  validate(inst);
  cfg.validate(DomainKind::PositiveOrthant);
  const Eigen::Index nx = inst.b.rows();
  const Eigen::Index ny = inst.b.cols();
  const Geometry burg = Geometry::burg();

  const Objective objective = [&](const Vector& x) {
    return deblur_objective(inst, as_image(x, nx, ny));
  };
  const StepOracle oracle = [&](int, const Vector& x, double, double, double tau) {
    const Matrix u = as_image(x, nx, ny);
    const Vector g = as_vector(kl_value_and_gradient(inst, u).gradient +
                               logpenalty_value_and_gradient(inst, u).gradient);
    int halvings = 0;
    while ((1.0 + tau * (g.array() * x.array())).minCoeff() <= kDenominatorGuard) {
      tau *= 0.5;
      if (++halvings > 200) throw SubproblemFailure("Burg step guard could not be met", x);
    }
    ProxStepResult step;
    step.candidate = burg_step(x, g, tau);
    step.delta = g.dot(step.candidate - x) + burg.scaled(tau).distance(step.candidate, x);
    step.inner_iterations = 1;
    step.certificate = Certificate::Exact;
    step.stationary = !(step.delta < -cfg.tol_stat);
    step.scale = tau;
    return step;
  };
  const InteriorTest interior = [](const Vector& x) { return (x.array() > 0).all(); };

  const Vector x0 = as_vector(inst.b.cwiseMax(1e-6));
  DeblurResult out;
  out.solve = minimize(objective, oracle, interior, x0, cfg, sink);
  out.u = as_image(out.solve.x, nx, ny);
  if (inst.truth) {
    out.psnr = psnr(*inst.truth, out.u, inst.peak);
    out.input_psnr = psnr(*inst.truth, inst.b, inst.peak);
  }
  return out;
}

}  // namespace breg::apps
