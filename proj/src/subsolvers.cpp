#include "breg/subsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "breg/errors.hpp"

namespace breg {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw UsageError(std::string(what) + " must be positive");
}

bool zero_like(const ConvexTerm& t, Eigen::Index n) {
  if (t.kind() == ConvexTerm::Kind::Zero) return true;
  return t.kind() == ConvexTerm::Kind::WeightedL1 && t.weights(n).isZero(0.0);
}

// Bregman proximal gradient on Phi(x) = S(x) + N(x) + D_h(x, anchor)/tau where
// S is the differentiable model remainder and N = f0. The kernel h is the
// unscaled generator of `geom`; each inner step solves
//
//   argmin <grad S(y), x> + N(x) + D_h(x, anchor)/tau + D_h(x, y)/t
//
// in closed form, with t found by backtracking on the descent inequality of S.
class BregmanProxGradient {
 public:
  BregmanProxGradient(const AnchoredModel& model, const Geometry& geom)
      : model_(model), geom_(geom), unit_(geom.scaled(1.0 / geom.scale())), tau_(geom.scale()),
        n_(model.anchor().size()) {
    const ConvexTerm& f0 = model.prox_term();
    switch (geom.kind()) {
      case GeometryKind::Euclidean:
        break;
      case GeometryKind::VariableMetric:
        if (!zero_like(f0, n_)) {
          throw UsageError("variable-metric subproblems support only f0 = 0");
        }
        metric_ldlt_.compute(geom.metric());
        break;
      case GeometryKind::BoltzmannShannon:
        if (f0.kind() == ConvexTerm::Kind::Simplex) simplex_ = true;
        [[fallthrough]];
      case GeometryKind::Burg:
        if (geom.kind() == GeometryKind::Burg && f0.kind() == ConvexTerm::Kind::Simplex) {
          throw UsageError("Burg subproblems do not support a simplex constraint");
        }
        // On the open orthant an l1 term is linear.
        entropy_linear_ = f0.weights(n_);
        break;
    }
    anchor_grad_ = kernel_gradient(model.anchor());
  }

  ProxStepResult solve(double eps, int max_inner) {
    const Vector& anchor = model_.anchor();
    Vector y = anchor;
    double t = tau_;
    ProxStepResult out;
    out.certificate = Certificate::RelativeStrongConvexity;
    out.gap_certificate = kInfinity;

    for (int it = 1; it <= max_inner; ++it) {
      const double s_y = smooth_value(y);
      const Vector g_y = smooth_gradient(y);
      const Vector h_y = kernel_gradient(y);

      Vector z;
      bool accepted = false;
      for (int halving = 0; halving < 200; ++halving) {
        const double c = 1.0 / tau_ + 1.0 / t;
        const Vector w = (anchor_grad_ / tau_ + h_y / t - g_y) / c;
        if (auto candidate = mirror_solve(w, c)) {
          z = std::move(*candidate);
          const double s_z = smooth_value(z);
          const double bound = s_y + g_y.dot(z - y) + unit_.distance(z, y) / t;
          if (std::isfinite(s_z) && s_z <= bound + 1e-13 * (1.0 + std::abs(s_y))) {
            accepted = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!accepted) throw SubproblemFailure("inner step size underflow", y);

      const Vector v = smooth_gradient(z) - g_y + (h_y - kernel_gradient(z)) / t;
      y = std::move(z);
      out.inner_iterations = it;
      out.gap_certificate = gap_bound(v, y);
      if (out.gap_certificate <= eps) {
        out.candidate = std::move(y);
        return out;
      }
      t = std::min(2.0 * t, 1e12 * tau_);
    }
    throw SubproblemFailure("inner solver reached its iteration cap without certificate", y);
  }

 private:
  double smooth_value(const Vector& x) const {
    double v = model_.remainder_value(x);
    if (entropy_linear_.size() != 0) v += entropy_linear_.dot(x);
    return v;
  }

  Vector smooth_gradient(const Vector& x) const {
    Vector g = model_.remainder_gradient(x);
    if (entropy_linear_.size() != 0) g += entropy_linear_;
    return g;
  }

  Vector kernel_gradient(const Vector& x) const { return unit_.gradient(x); }

  // argmin N(x) + c (h(x) - <w, x>).
  std::optional<Vector> mirror_solve(const Vector& w, double c) const {
    Vector x;
    switch (geom_.kind()) {
      case GeometryKind::Euclidean:
        x = model_.prox_term().prox(w, 1.0 / c);
        break;
      case GeometryKind::VariableMetric:
        x = metric_ldlt_.solve(w);
        break;
      case GeometryKind::BoltzmannShannon:
        if (simplex_) {
          const double shift = w.maxCoeff();
          x = (w.array() - shift).exp().matrix();
          x /= x.sum();
        } else {
          x = (w.array() - 1.0).exp().matrix();
        }
        break;
      case GeometryKind::Burg:
        if ((w.array() >= 0).any()) return std::nullopt;
        x = (-w.array().inverse()).matrix();
        break;
    }
    if (!x.allFinite() || !geom_.in_interior(x)) return std::nullopt;
    return x;
  }

  // sup_x -(<v, x - y> + D_h(x, y)/tau), closed form per kernel.
  double gap_bound(const Vector& v, const Vector& y) const {
    switch (geom_.kind()) {
      case GeometryKind::Euclidean: return 0.5 * tau_ * v.squaredNorm();
      case GeometryKind::VariableMetric: return 0.5 * tau_ * v.dot(metric_ldlt_.solve(v));
      case GeometryKind::BoltzmannShannon: {
        if (simplex_) {
          const Vector s = y.array().log() - tau_ * v.array();
          const double m = s.maxCoeff();
          const double lse = m + std::log((s.array() - m).exp().sum());
          return std::max(0.0, v.dot(y) + lse / tau_);
        }
        double gap = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          const double a = tau_ * v[i];
          gap += y[i] / tau_ * (std::expm1(-a) + a);
        }
        return std::isfinite(gap) ? std::max(gap, 0.0) : kInfinity;
      }
      case GeometryKind::Burg: {
        double gap = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          const double c = tau_ * v[i] * y[i];
          if (c <= -1.0) return kInfinity;
          gap += (c - std::log1p(c)) / tau_;
        }
        return std::max(gap, 0.0);
      }
    }
    return kInfinity;
  }

  const AnchoredModel& model_;
  const Geometry& geom_;
  Geometry unit_;
  double tau_;
  Eigen::Index n_;
  bool simplex_ = false;
  Vector entropy_linear_;
  Vector anchor_grad_;
  Eigen::LDLT<Matrix> metric_ldlt_;
};

std::optional<Vector> closed_form_step(const AnchoredModel& model, const Geometry& geom) {
  const Vector& anchor = model.anchor();
  const Eigen::Index n = anchor.size();
  const ConvexTerm& f0 = model.prox_term();
  const double tau = geom.scale();

  if (model.is_linear()) {
    const Vector& l = model.linear_term();
    switch (geom.kind()) {
      case GeometryKind::Euclidean:
        return f0.prox(anchor - tau * l, tau);
      case GeometryKind::VariableMetric:
        if (!zero_like(f0, n)) return std::nullopt;
        return Vector(anchor - tau * geom.metric().ldlt().solve(l));
      case GeometryKind::BoltzmannShannon:
        if (f0.kind() == ConvexTerm::Kind::Simplex) return entropic_simplex_step(anchor, l, tau);
        return multiplicative_positive_step(anchor, l + f0.weights(n), tau).value;
      case GeometryKind::Burg:
        if (f0.kind() == ConvexTerm::Kind::Simplex) return std::nullopt;
        return burg_step(anchor, l + f0.weights(n), tau);
    }
  }

  const bool quadratic_only = model.quadratic_term().size() != 0 && model.has_smooth_remainder() &&
                              !model.is_l1_composite();
  if (quadratic_only && zero_like(f0, n)) {
    // Only a pure quadratic remainder qualifies; probe that the gradient is affine.
    const Vector& l = model.linear_term();
    const Matrix& B = model.quadratic_term();
    const Vector probe = anchor + Vector::Ones(n);
    if (!model.remainder_gradient(probe).isApprox(l + B * Vector::Ones(n), 1e-12)) {
      return std::nullopt;
    }
    Matrix system;
    if (geom.kind() == GeometryKind::Euclidean) {
      system = B + Matrix::Identity(n, n) / tau;
    } else if (geom.kind() == GeometryKind::VariableMetric) {
      system = B + geom.metric() / tau;
    } else {
      return std::nullopt;
    }
    Eigen::LDLT<Matrix> ldlt(system);
    if (ldlt.info() != Eigen::Success) throw NumericError("variable-metric system factorization failed");
    return Vector(anchor - ldlt.solve(l));
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Certificate c) {
  switch (c) {
    case Certificate::Exact: return "exact";
    case Certificate::RelativeStrongConvexity: return "relative-strong-convexity";
    case Certificate::DualityGap: return "duality-gap";
  }
  return "unknown";
}

double model_improvement(const AnchoredModel& model, const Geometry& geom, const Vector& y) {
  const double d = geom.distance(y, model.anchor());
  if (!std::isfinite(d)) return kInfinity;
  const double m = model.value(y);
  if (!std::isfinite(m)) return kInfinity;
  return m + d - model.anchor_value();
}

ProxStepResult prox_step(const AnchoredModel& model, const Geometry& geom, double eps,
                         const SubsolverOptions& options) {
  require_positive(eps, "subproblem tolerance");
  const Vector& anchor = model.anchor();
  if (!geom.in_interior(anchor)) throw UsageError("prox_step anchor must lie in int dom h");

  ProxStepResult out;
  if (auto y = closed_form_step(model, geom)) {
    out.candidate = std::move(*y);
    out.inner_iterations = 1;
    out.gap_certificate = 0.0;
    out.certificate = Certificate::Exact;
  } else if (model.is_l1_composite() && geom.kind() == GeometryKind::Euclidean &&
             zero_like(model.prox_term(), anchor.size())) {
    const Matrix& J = model.composite_jacobian();
    const Vector target = J * anchor - model.composite_offset();
    DualL1Options dual_options;
    dual_options.tol = kInfinity;
    dual_options.max_iterations = options.max_inner;
    dual_options.gap_target = eps;
    const DualL1Result r = dual_l1_affine_solver(J, target, anchor, geom.scale(), dual_options);
    out.candidate = r.u;
    out.inner_iterations = r.iterations;
    out.gap_certificate = r.duality_gap;
    out.certificate = Certificate::DualityGap;
  } else if (model.has_smooth_remainder()) {
    BregmanProxGradient solver(model, geom);
    out = solver.solve(eps, options.max_inner);
  } else {
    throw UsageError("no subproblem solver for this model and geometry combination");
  }

  if (!geom.in_interior(out.candidate)) {
    throw SubproblemFailure("subproblem solution left int dom h", out.candidate);
  }
  out.delta = model_improvement(model, geom, out.candidate);
  out.stationary = out.delta >= -options.tol_stat;
  out.scale = geom.scale();
  return out;
}

Vector soft_threshold(const Vector& v, double theta) {
  if (!(theta >= 0)) throw UsageError("soft-threshold level must be nonnegative");
  return (v.array().sign() * (v.array().abs() - theta).cwiseMax(0.0)).matrix();
}

Vector entropic_simplex_step(const Vector& anchor, const Vector& grad, double tau) {
  require_positive(tau, "step scale");
  if (anchor.size() != grad.size()) throw UsageError("dimension mismatch in simplex step");
  if (!(anchor.array() > 0).all()) throw DomainError("simplex step needs a strictly positive anchor");
  const Vector s = anchor.array().log() - tau * grad.array();
  const double shift = s.maxCoeff();
  Vector out = (s.array() - shift).exp().matrix();
  out /= out.sum();
  return out;
}

PositiveStep multiplicative_positive_step(const Vector& anchor, const Vector& grad, double tau) {
  require_positive(tau, "step scale");
  if (anchor.size() != grad.size()) throw UsageError("dimension mismatch in multiplicative step");
  if (!(anchor.array() > 0).all()) throw DomainError("multiplicative step needs a positive anchor");
  PositiveStep out;
  out.value = (anchor.array() * (-tau * grad.array()).exp()).matrix();
  for (double& v : out.value) {
    if (!(v <= 1e300)) {
      v = 1e300;
      out.clamped = true;
    } else if (v < std::numeric_limits<double>::min()) {
      v = std::numeric_limits<double>::min();
      out.clamped = true;
    }
  }
  return out;
}

Vector burg_step(const Vector& anchor, const Vector& grad, double tau) {
  require_positive(tau, "step scale");
  if (anchor.size() != grad.size()) throw UsageError("dimension mismatch in Burg step");
  if (!(anchor.array() > 0).all()) throw DomainError("Burg step needs a positive anchor");
  const Vector denom = (1.0 + tau * grad.array() * anchor.array()).matrix();
  if (!(denom.array() > 0).all()) {
    throw SubproblemFailure("Burg subproblem unbounded: 1 + tau g x <= 0", anchor);
  }
  return anchor.cwiseQuotient(denom);
}

Matrix singular_value_threshold(const Matrix& M, double theta) {
  if (!(theta >= 0)) throw UsageError("singular value threshold must be nonnegative");
  if (M.size() == 0) return M;
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD failed");
  const Vector shrunk = (svd.singularValues().array() - theta).cwiseMax(0.0).matrix();
  Matrix out = svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
  if (!out.allFinite()) throw NumericError("SVD produced non-finite values");
  return out;
}

Vector project_zero_mean_unit_ball(const Vector& col, bool subtract_mean) {
  Vector out = col;
  if (subtract_mean && out.size() > 0) out.array() -= out.mean();
  const double norm = out.norm();
  if (norm > 1.0) out /= norm;
  return out;
}

DualL1Result dual_l1_affine_solver(const Matrix& K, const Vector& target, const Vector& anchor,
                                   double tau, const DualL1Options& options,
                                   const Vector* warm_start) {
  require_positive(tau, "tau");
  if (!(options.tol > 0)) throw UsageError("dual solver tolerance must be positive");
  if (K.rows() != target.size() || K.cols() != anchor.size()) {
    throw UsageError("dimension mismatch in dual l1 solver");
  }
  const Eigen::Index m = K.rows();
  const Vector residual_at_anchor = K * anchor - target;

  auto duality_gap = [&](const Vector& u, const Vector& p) {
    const double primal = (K * u - target).cwiseAbs().sum() + (u - anchor).squaredNorm() / (2.0 * tau);
    const double dual = p.dot(residual_at_anchor) - 0.5 * tau * (K.transpose() * p).squaredNorm();
    return std::max(primal - dual, 0.0);
  };

  DualL1Result out;
  out.dual = Vector::Zero(m);
  if (warm_start != nullptr && warm_start->size() == m) {
    out.dual = warm_start->cwiseMax(-1.0).cwiseMin(1.0);
  }

  double lipschitz = 0.0;
  if (m > 0 && K.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K.transpose() * K, Eigen::EigenvaluesOnly);
    lipschitz = tau * eig.eigenvalues().maxCoeff();
  }
  if (!(lipschitz > 0)) {
    out.u = anchor;
    out.duality_gap = duality_gap(out.u, out.dual);
    return out;
  }
  const double step = 1.0 / lipschitz;

  out.u = anchor - tau * K.transpose() * out.dual;
  Vector previous = out.dual;
  double momentum = 1.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vector base = out.dual;
    if (options.accelerated) {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      base += ((momentum - 1.0) / next) * (out.dual - previous);
      momentum = next;
    }
    const Vector grad = K * (anchor - tau * K.transpose() * base) - target;
    Vector dual_next = (base + step * grad).cwiseMax(-1.0).cwiseMin(1.0);
    // Adaptive restart: drop the momentum once it points away from the ascent step.
    if (options.accelerated && (base - dual_next).dot(dual_next - out.dual) > 0.0) momentum = 1.0;
    previous = std::move(out.dual);
    out.dual = std::move(dual_next);
    Vector u_next = anchor - tau * K.transpose() * out.dual;
    const double change = (u_next - out.u).cwiseAbs().maxCoeff();
    out.u = std::move(u_next);
    out.iterations = it;
    if (change < options.tol) {
      out.duality_gap = duality_gap(out.u, out.dual);
      if (!options.gap_target || out.duality_gap <= *options.gap_target) return out;
    }
  }
  throw SubproblemFailure("dual l1 solver reached its iteration cap", out.u);
}

}  // namespace breg
