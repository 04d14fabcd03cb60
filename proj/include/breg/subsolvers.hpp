#pragma once

#include <optional>
#include <string_view>

#include "breg/geometry.hpp"
#include "breg/model.hpp"
#include "breg/types.hpp"

namespace breg {

/// How the accuracy of a subproblem solution was established.
enum class Certificate {
  /// Closed-form minimiser; gap is zero up to rounding.
  Exact,
  /// Phi(y) - inf Phi <= sup_x -(<v, x - y> + D(x, y)) for a subgradient v of
  /// Phi at y, valid because Phi = m + D(., anchor) is 1-strongly convex
  /// relative to the scaled generator.
  RelativeStrongConvexity,
  /// Primal minus dual value of the l1-composite subproblem.
  DualityGap,
};

std::string_view to_string(Certificate c);

/// Approximate minimiser y of Phi(x) = m_anchor(x) + D(x, anchor).
struct ProxStepResult {
  Vector candidate;
  /// Phi(y) - f(anchor).
  double delta = 0.0;
  int inner_iterations = 0;
  /// Guaranteed bound on Phi(y) - inf Phi.
  double gap_certificate = 0.0;
  Certificate certificate = Certificate::Exact;
  /// delta >= -tol_stat: no sufficient model decrease exists.
  bool stationary = false;
  /// Geometry scale the step was computed with.
  double scale = 1.0;
};

struct SubsolverOptions {
  int max_inner = 20000;
  double tol_stat = 1e-10;
};

/// Delta = m(y) + D(y, anchor) - f(anchor); +inf when D(y, anchor) is infinite.
double model_improvement(const AnchoredModel& model, const Geometry& geom, const Vector& y);

/// Solves the Bregman proximal subproblem to accuracy eps.
///
/// Closed forms are used for linear models (Euclidean, variable metric,
/// Boltzmann-Shannon and Burg steps, with l1, orthant or simplex f0), for
/// the quadratic variable-metric model, and the l1 composite goes to the
/// dual solver. Any other model with a differentiable remainder is handled
/// by a Bregman proximal gradient loop with backtracking. Throws UsageError
/// for combinations without a solver and SubproblemFailure when the inner
/// loop runs out of iterations or the subproblem is unbounded.
ProxStepResult prox_step(const AnchoredModel& model, const Geometry& geom, double eps,
                         const SubsolverOptions& options = {});

/// sign(v) max(|v| - theta, 0), coordinate-wise.
Vector soft_threshold(const Vector& v, double theta);

/// Mirror step on the simplex: anchor_i exp(-tau g_i), normalised.
/// Throws DomainError unless the anchor is strictly positive.
Vector entropic_simplex_step(const Vector& anchor, const Vector& grad, double tau);

struct PositiveStep {
  Vector value;
  /// Some coordinate left [DBL_MIN, 1e300] and was clamped.
  bool clamped = false;
};

/// anchor * exp(-tau grad), coordinate-wise.
PositiveStep multiplicative_positive_step(const Vector& anchor, const Vector& grad, double tau);

/// Burg-entropy step anchor / (1 + tau grad anchor). Throws SubproblemFailure
/// when a denominator is not positive (the subproblem is unbounded below).
Vector burg_step(const Vector& anchor, const Vector& grad, double tau);

/// U diag(max(sigma - theta, 0)) V^T.
Matrix singular_value_threshold(const Matrix& M, double theta);

/// Optionally subtract the mean, then project onto the Euclidean unit ball.
Vector project_zero_mean_unit_ball(const Vector& col, bool subtract_mean);

struct DualL1Options {
  /// Stop once successive primal iterates differ by less than this (max-norm).
  double tol = 1e-3;
  int max_iterations = 100000;
  /// When set, additionally require primal-dual gap <= gap_target.
  std::optional<double> gap_target;
  /// Use FISTA momentum with adaptive restart instead of plain projected steps.
  bool accelerated = false;
};

struct DualL1Result {
  Vector u;
  Vector dual;
  int iterations = 0;
  double duality_gap = 0.0;
};

/// Minimises |K u - target|_1 + |u - anchor|^2 / (2 tau) by projected gradient
/// ascent on the box-constrained dual; u = anchor - tau K^T p.
/// With tol = infinity the run stops as soon as the gap target is met.
/// Throws SubproblemFailure (carrying the last u) at the iteration cap.
DualL1Result dual_l1_affine_solver(const Matrix& K, const Vector& target, const Vector& anchor,
                                   double tau, const DualL1Options& options = {},
                                   const Vector* warm_start = nullptr);

}  // namespace breg
