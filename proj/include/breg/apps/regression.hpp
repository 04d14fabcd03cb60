#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "breg/model.hpp"
#include "breg/solver.hpp"
#include "breg/types.hpp"

namespace breg::apps {

/// Robust exponential regression: minimise sum_i |F_i(u) - y_i| with
/// F_i(u) = sum_j b_j exp(-a_j x_i) and u = (a_1..a_P, b_1..b_P).
struct RegressionInstance {
  Vector x;
  Vector y;
  int terms = 1;
  /// Ground-truth parameters; empty for loaded data.
  Vector truth;
  /// Noise added to F(truth); empty for loaded data.
  Vector noise;
};

/// Synthetic instance: x_i equally spaced on [0, 5], a_j = 5^(j-1) U[0.4, 0.8),
/// b_j ~ U[2, 6), y_i = F_i(truth) + Laplace(0, noise_scale).
/// Draw order: a_1..a_P, b_1..b_P, then n_1..n_M.
RegressionInstance make_regression_instance(int m, int p, std::uint64_t seed, double noise_scale = 0.5);

struct ResidualJacobian {
  /// r_i = F_i(u) - y_i.
  Vector residual;
  /// Row i is (dF_i/da_1..dF_i/da_P, dF_i/db_1..dF_i/db_P).
  Matrix jacobian;
  /// Some exponent exceeded the clamp and was capped.
  bool clamped = false;
};

/// Exponents -a_j x_i are capped at 700 to avoid overflow.
ResidualJacobian regression_residual_and_jacobian(const RegressionInstance& inst, const Vector& u);

double regression_objective(const RegressionInstance& inst, const Vector& u);

/// Constant L of the quadratic growth sum_i L_i t^2 / 2 valid for anchors and
/// points with a_j >= a_lo and |b_j| <= b_max; L_i bounds the spectral norm of
/// the Hessian of F_i on that box.
double regression_growth_constant(const RegressionInstance& inst, double a_lo, double b_max);

/// Prox-linear model g = |.|_1 of F(u) - y with the box-certified growth.
Model regression_model(const RegressionInstance& inst, double a_lo = 0.4, double b_max = 8.0);

/// Default start: a_j spread over [0.75, 1.75], b_j = 0.5.
Vector regression_start(int p);

enum class RegressionVariant { ProxLinear, ProxLinear2, ProxLinearLS };

std::string_view to_string(RegressionVariant v);
/// Accepts "prox-linear", "prox-linear2", "prox-linear-LS". Throws UsageError.
RegressionVariant parse_regression_variant(std::string_view name);

struct RegressionOptions {
  RegressionVariant variant = RegressionVariant::ProxLinearLS;
  /// tau is the (initial) Euclidean scale; max_linesearch also caps tau halvings.
  SolverConfig solver;
  /// Dual solver stopping rule on successive primal iterates.
  double dual_tol = 1e-3;
};

struct RegressionResult {
  Vector u;
  SolveResult solve;
  /// Scale in use when the run stopped.
  double final_tau = 0.0;
};

/// prox-linear-LS: fixed tau, line search on objective values.
/// prox-linear: tau halved until the full step descends, eta = 1; tau
/// carries over to the next iteration. Every trial solve counts towards the
/// inner iterations.
/// prox-linear2: prox-linear started from the tau at which the first step
/// needs no halving (found by an uncounted probe).
RegressionResult run_regression(const RegressionInstance& inst, const Vector& u0,
                                const RegressionOptions& options, const TraceSink& sink = {});

/// Accumulated inner iterations spent before the run first reached an
/// objective <= target; -1 if it never did.
long long inner_iterations_to_reach(const SolveResult& result, double target);

/// max_j |u_j - truth_j| minimised over permutations of the P terms.
double parameter_deviation(const Vector& u, const Vector& truth, int p);

}  // namespace breg::apps
