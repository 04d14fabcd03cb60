#include "breg/apps/lasso.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "breg/errors.hpp"
#include "breg/rng.hpp"

namespace breg::apps {

LassoInstance make_lasso_instance(int rows, int cols, std::uint64_t seed, double lambda) {
  if (rows < 1 || cols < 1) throw UsageError("LASSO needs positive sizes");
  if (!(lambda >= 0)) throw UsageError("lambda must be nonnegative");
  SplitMix64 rng(seed);
  LassoInstance inst;
  inst.lambda = lambda;
  inst.A.resize(rows, cols);
  const double s = 1.0 / std::sqrt(static_cast<double>(rows));
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) inst.A(i, j) = s * rng.normal();
  }
  Vector truth = Vector::Zero(cols);
  for (int t = 0; t < std::min(3, cols); ++t) {
    const int j = static_cast<int>(rng.uniform(0.0, cols));
    truth[j] = t % 2 == 0 ? 1.0 : -1.0;
  }
  inst.b = inst.A * truth;
  for (int i = 0; i < rows; ++i) inst.b[i] += 0.01 * rng.normal();
  return inst;
}

double lasso_objective(const LassoInstance& inst, const Vector& x) {
  return 0.5 * (inst.A * x - inst.b).squaredNorm() + inst.lambda * x.cwiseAbs().sum();
}

double lasso_lipschitz(const LassoInstance& inst) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.A.transpose() * inst.A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

Model lasso_model(const LassoInstance& inst) {
  SmoothFunction f1;
  f1.value = [inst](const Vector& x) { return 0.5 * (inst.A * x - inst.b).squaredNorm(); };
  f1.gradient = [inst](const Vector& x) { return Vector(inst.A.transpose() * (inst.A * x - inst.b)); };
  f1.hessian = [inst](const Vector&) { return Matrix(inst.A.transpose() * inst.A); };
  return Model::forward_backward(ConvexTerm::l1(inst.lambda), std::move(f1),
                                 GrowthFunction::quadratic(lasso_lipschitz(inst)));
}

Vector lasso_coordinate_descent(const LassoInstance& inst, double gap_tol, int max_sweeps) {
  const Eigen::Index n = inst.A.cols();
  Vector x = Vector::Zero(n);
  Vector r = -inst.b;
  const Vector col_sq = inst.A.colwise().squaredNorm().transpose();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = x[j];
      const double z = old - inst.A.col(j).dot(r) / col_sq[j];
      const double t = inst.lambda / col_sq[j];
      x[j] = z > t ? z - t : (z < -t ? z + t : 0.0);
      if (x[j] != old) r += (x[j] - old) * inst.A.col(j);
    }
    // Dual point theta = -r scaled into {|A^T theta| <= lambda}.
    const double corr = (inst.A.transpose() * r).cwiseAbs().maxCoeff();
    const double scale = corr > inst.lambda ? inst.lambda / corr : 1.0;
    const Vector theta = -scale * r;
    const double primal = 0.5 * r.squaredNorm() + inst.lambda * x.cwiseAbs().sum();
    const double dual = theta.dot(inst.b) - 0.5 * theta.squaredNorm();
    if (primal - dual <= gap_tol) break;
  }
  return x;
}

}  // namespace breg::apps
