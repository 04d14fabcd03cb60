#pragma once

#include <cstdint>

#include "breg/model.hpp"
#include "breg/types.hpp"

namespace breg::apps {

/// min 1/2 |A x - b|^2 + lambda |x|_1.
struct LassoInstance {
  Matrix A;
  Vector b;
  double lambda = 0.1;
};

/// Gaussian A (entries N(0, 1/rows)), sparse ground truth with three unit
/// spikes, b = A x_true + 0.01 N(0, 1). Draw order: A column-major, spike
/// positions, noise.
LassoInstance make_lasso_instance(int rows, int cols, std::uint64_t seed, double lambda = 0.1);

double lasso_objective(const LassoInstance& inst, const Vector& x);

/// Largest eigenvalue of A^T A.
double lasso_lipschitz(const LassoInstance& inst);

/// Forward-backward model: f0 = lambda |.|_1, f1 = 1/2 |A x - b|^2, growth L t^2 / 2.
Model lasso_model(const LassoInstance& inst);

/// Cyclic coordinate descent until the duality gap of the rescaled dual point
/// drops below `gap_tol` or `max_sweeps` passes have run.
Vector lasso_coordinate_descent(const LassoInstance& inst, double gap_tol = 1e-12, int max_sweeps = 100000);

}  // namespace breg::apps
