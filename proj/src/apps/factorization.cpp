#include "breg/apps/factorization.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "breg/errors.hpp"
#include "breg/geometry.hpp"
#include "breg/rng.hpp"
#include "breg/subsolvers.hpp"

namespace breg::apps {

namespace {

double regulariser(const FactorizationInstance& inst, const Matrix& Z) {
  switch (inst.z_constraint) {
    case ZConstraint::Z1:
    case ZConstraint::Z2: return 0.0;
    case ZConstraint::Z3Sparse: return Z.cwiseAbs().sum();
    case ZConstraint::Z3LowRank: {
      Eigen::JacobiSVD<Matrix> svd(Z);
      return svd.singularValues().sum();
    }
  }
  return 0.0;
}

bool entropic_u(const FactorizationInstance& inst) { return inst.u_constraint == UConstraint::U3; }

bool entropic_z(const FactorizationInstance& inst) {
  return inst.z_constraint == ZConstraint::Z2 && !inst.euclidean_z2;
}

Vector flat(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

struct Shape {
  Eigen::Index m, k, n;
};

void unpack(const Vector& x, const Shape& s, Matrix& U, Matrix& Z) {
  U = Eigen::Map<const Matrix>(x.data(), s.m, s.k);
  Z = Eigen::Map<const Matrix>(x.data() + s.m * s.k, s.k, s.n);
}

Vector pack(const Matrix& U, const Matrix& Z) {
  Vector x(U.size() + Z.size());
  x << flat(U), flat(Z);
  return x;
}

}  // namespace

std::string_view to_string(UConstraint c) {
  switch (c) {
    case UConstraint::U1: return "u1";
    case UConstraint::U2: return "u2";
    case UConstraint::U3: return "u3";
  }
  return "unknown";
}

std::string_view to_string(ZConstraint c) {
  switch (c) {
    case ZConstraint::Z1: return "z1";
    case ZConstraint::Z2: return "z2";
    case ZConstraint::Z3Sparse: return "z3s";
    case ZConstraint::Z3LowRank: return "z3n";
  }
  return "unknown";
}

UConstraint parse_u_constraint(std::string_view s) {
  if (s == "u1") return UConstraint::U1;
  if (s == "u2") return UConstraint::U2;
  if (s == "u3") return UConstraint::U3;
  throw UsageError("unknown U constraint: " + std::string(s));
}

ZConstraint parse_z_constraint(std::string_view s) {
  if (s == "z1") return ZConstraint::Z1;
  if (s == "z2") return ZConstraint::Z2;
  if (s == "z3s") return ZConstraint::Z3Sparse;
  if (s == "z3n") return ZConstraint::Z3LowRank;
  throw UsageError("unknown Z constraint: " + std::string(s));
}

PartialGradients mf_partial_gradients(const Matrix& A, const Matrix& U, const Matrix& Z) {
  if (U.rows() != A.rows() || Z.cols() != A.cols() || U.cols() != Z.rows()) {
    throw UsageError("factor shapes do not match the data");
  }
  const Matrix R = U * Z - A;
  return {R * Z.transpose(), U.transpose() * R};
}

double factorization_objective(const FactorizationInstance& inst, const Matrix& U, const Matrix& Z) {
  if (U.rows() != inst.A.rows() || Z.cols() != inst.A.cols() || U.cols() != Z.rows()) {
    throw UsageError("factor shapes do not match the data");
  }
  return 0.5 * (inst.A - U * Z).squaredNorm() + inst.lambda * regulariser(inst, Z);
}

void check_feasible(const FactorizationInstance& inst, const Matrix& U, const Matrix& Z) {
  const Eigen::Index m = inst.A.rows();
  const Eigen::Index n = inst.A.cols();
  if (inst.rank < 1 || inst.rank > std::min(m, n)) throw UsageError("rank must lie in [1, min(M, N)]");
  if (U.rows() != m || U.cols() != inst.rank || Z.rows() != inst.rank || Z.cols() != n) {
    throw UsageError("initial factors have the wrong shape");
  }
  if (!U.allFinite() || !Z.allFinite()) throw UsageError("non-finite initial factors");
  if (!(inst.lambda >= 0) || !(inst.tau_u > 0) || !(inst.tau_z > 0)) {
    throw UsageError("need lambda >= 0 and positive step scales");
  }
  switch (inst.u_constraint) {
    case UConstraint::U1: break;
    case UConstraint::U2:
      for (Eigen::Index j = 0; j < U.cols(); ++j) {
        if (U.col(j).norm() > 1.0 + 1e-12) throw UsageError("U2 column outside the unit ball");
        if (j >= 1 && std::abs(U.col(j).mean()) > 1e-12) throw UsageError("U2 column without zero mean");
      }
      break;
    case UConstraint::U3:
      if (!(U.array() > 0).all()) throw UsageError("U3 start must be strictly positive");
      for (Eigen::Index j = 0; j < U.cols(); ++j) {
        if (std::abs(U.col(j).sum() - 1.0) > 1e-12) throw UsageError("U3 column not on the simplex");
      }
      break;
  }
  if (inst.z_constraint == ZConstraint::Z2) {
    if (inst.euclidean_z2 ? !(Z.array() >= 0).all() : !(Z.array() > 0).all()) {
      throw UsageError("Z2 start violates nonnegativity");
    }
  }
}

void default_initialization(const FactorizationInstance& inst, std::uint64_t seed, Matrix& U, Matrix& Z) {
  const Eigen::Index m = inst.A.rows();
  const Eigen::Index n = inst.A.cols();
  const Eigen::Index k = inst.rank;
  SplitMix64 rng(seed);
  U.resize(m, k);
  Z.resize(k, n);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      U(i, j) = inst.u_constraint == UConstraint::U3 ? rng.uniform(0.5, 1.5) : rng.normal();
    }
  }
  if (inst.u_constraint == UConstraint::U3) {
    for (Eigen::Index j = 0; j < k; ++j) U.col(j) /= U.col(j).sum();
  } else if (inst.u_constraint == UConstraint::U2) {
    for (Eigen::Index j = 0; j < k; ++j) U.col(j) = project_zero_mean_unit_ball(U.col(j), j >= 1);
  }
  const bool positive = inst.z_constraint == ZConstraint::Z2;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) Z(i, j) = positive ? rng.uniform(0.5, 1.5) : rng.normal();
  }
}

Matrix make_factorization_data(int m, int n, int rank, std::uint64_t seed, double noise) {
  if (m < 1 || n < 1 || rank < 1) throw UsageError("factorization data needs positive sizes");
  SplitMix64 rng(seed);
  Matrix U(m, rank);
  for (int j = 0; j < rank; ++j) {
    for (int i = 0; i < m; ++i) U(i, j) = rng.uniform();
    U.col(j) /= U.col(j).sum();
  }
  Matrix Z(rank, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < rank; ++i) Z(i, j) = rng.uniform();
  }
  Matrix A = U * Z;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) A(i, j) = std::max(0.0, A(i, j) + noise * rng.normal());
  }
  return A;
}

void split_factors(const FactorizationInstance& inst, const Vector& x, Matrix& U, Matrix& Z) {
  const Shape shape{inst.A.rows(), inst.rank, inst.A.cols()};
  if (x.size() != shape.m * shape.k + shape.k * shape.n) throw UsageError("stacked factor length mismatch");
  unpack(x, shape, U, Z);
}

FactorizationResult run_factorization(const FactorizationInstance& inst, const Matrix& U0,
                                      const Matrix& Z0, const SolverConfig& cfg, const TraceSink& sink) {
  check_feasible(inst, U0, Z0);
  const bool restricted = entropic_u(inst) || entropic_z(inst);
  cfg.validate(restricted ? DomainKind::PositiveOrthant : DomainKind::FullSpace);

  const Shape shape{inst.A.rows(), inst.rank, inst.A.cols()};
  const Geometry entropy = Geometry::boltzmann_shannon();

  const Objective objective = [&](const Vector& x) {
    Matrix U, Z;
    unpack(x, shape, U, Z);
    return factorization_objective(inst, U, Z);
  };

  const StepOracle oracle = [&](int, const Vector& x, double fx, double, double) {
    Matrix U, Z;
    unpack(x, shape, U, Z);
    const PartialGradients g = mf_partial_gradients(inst.A, U, Z);
    const double tu = inst.tau_u;
    const double tz = inst.tau_z;

    Matrix Uh(U.rows(), U.cols());
    double du = 0.0;
    switch (inst.u_constraint) {
      case UConstraint::U1:
        Uh = U - tu * g.G_U;
        break;
      case UConstraint::U2:
        for (Eigen::Index j = 0; j < U.cols(); ++j) {
          Uh.col(j) = project_zero_mean_unit_ball(U.col(j) - tu * g.G_U.col(j), j >= 1);
        }
        break;
      case UConstraint::U3:
        for (Eigen::Index j = 0; j < U.cols(); ++j) {
          Uh.col(j) = entropic_simplex_step(U.col(j), g.G_U.col(j), tu);
        }
        du = entropy.scaled(tu).distance(flat(Uh), flat(U));
        break;
    }
    if (!entropic_u(inst)) du = 0.5 * (Uh - U).squaredNorm() / tu;

    Matrix Zh;
    double dz = 0.0;
    const Matrix zstep = Z - tz * g.G_Z;
    switch (inst.z_constraint) {
      case ZConstraint::Z1: Zh = zstep; break;
      case ZConstraint::Z2:
        if (inst.euclidean_z2) {
          Zh = zstep.cwiseMax(0.0);
        } else {
          const PositiveStep p = multiplicative_positive_step(flat(Z), flat(g.G_Z), tz);
          Zh = Eigen::Map<const Matrix>(p.value.data(), Z.rows(), Z.cols());
          dz = entropy.scaled(tz).distance(p.value, flat(Z));
        }
        break;
      case ZConstraint::Z3Sparse: {
        const Vector v = soft_threshold(flat(zstep), inst.lambda * tz);
        Zh = Eigen::Map<const Matrix>(v.data(), Z.rows(), Z.cols());
        break;
      }
      case ZConstraint::Z3LowRank: Zh = singular_value_threshold(zstep, inst.lambda * tz); break;
    }
    if (!entropic_z(inst)) dz = 0.5 * (Zh - Z).squaredNorm() / tz;

    ProxStepResult step;
    step.candidate = pack(Uh, Zh);
    const double fidelity = 0.5 * (inst.A - U * Z).squaredNorm();
    const double model = fidelity + (g.G_U.array() * (Uh - U).array()).sum() +
                         (g.G_Z.array() * (Zh - Z).array()).sum() + inst.lambda * regulariser(inst, Zh);
    step.delta = model + du + dz - fx;
    step.inner_iterations = 1;
    step.certificate = Certificate::Exact;
    step.stationary = !(step.delta < -cfg.tol_stat);
    step.scale = 1.0;
    return step;
  };

  const InteriorTest interior = [&](const Vector& x) {
    if (!x.allFinite()) return false;
    const Eigen::Index nu = shape.m * shape.k;
    if (entropic_u(inst) && !(x.head(nu).array() > 0).all()) return false;
    if (entropic_z(inst) && !(x.tail(x.size() - nu).array() > 0).all()) return false;
    return true;
  };

  FactorizationResult out;
  out.solve = minimize(objective, oracle, interior, pack(U0, Z0), cfg, sink);
  unpack(out.solve.x, shape, out.U, out.Z);
  return out;
}

int numerical_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(M).singularValues();
  if (!(sv[0] > 0)) return 0;
  return static_cast<int>((sv.array() > rel_tol * sv[0]).count());
}

}  // namespace breg::apps
