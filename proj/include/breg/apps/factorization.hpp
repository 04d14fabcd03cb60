#pragma once

#include <cstdint>
#include <string_view>

#include "breg/solver.hpp"
#include "breg/types.hpp"

namespace breg::apps {

/// Constraint on the dictionary U (M x K).
///   U1  unconstrained, Euclidean gradient step
///   U2  |U_j| <= 1 for every column, columns j >= 2 have zero mean
///   U3  every column on the unit simplex, entropic step
enum class UConstraint { U1, U2, U3 };

/// Constraint / regulariser on the coefficients Z (K x N).
///   Z1         unconstrained, g = 0
///   Z2         Z >= 0, g = 0 (multiplicative step, or projection when euclidean_z2)
///   Z3Sparse   g = |Z|_1, soft-thresholding
///   Z3LowRank  g = |Z|_*, singular value thresholding
enum class ZConstraint { Z1, Z2, Z3Sparse, Z3LowRank };

std::string_view to_string(UConstraint c);
std::string_view to_string(ZConstraint c);
/// "u1", "u2", "u3". Throws UsageError.
UConstraint parse_u_constraint(std::string_view s);
/// "z1", "z2", "z3s", "z3n". Throws UsageError.
ZConstraint parse_z_constraint(std::string_view s);

/// min 1/2 |A - U Z|_F^2 + lambda g(Z) over U in the U-set and Z in the Z-set.
struct FactorizationInstance {
  Matrix A;
  int rank = 1;
  UConstraint u_constraint = UConstraint::U3;
  ZConstraint z_constraint = ZConstraint::Z2;
  double lambda = 0.0;
  double tau_u = 1.0;
  double tau_z = 1.0;
  /// Z2 with a Euclidean projection instead of the Boltzmann-Shannon step.
  bool euclidean_z2 = false;
};

struct PartialGradients {
  /// (U Z - A) Z^T.
  Matrix G_U;
  /// U^T (U Z - A).
  Matrix G_Z;
};

/// Partial gradients of 1/2 |A - U Z|_F^2. Throws UsageError on shape mismatch.
PartialGradients mf_partial_gradients(const Matrix& A, const Matrix& U, const Matrix& Z);

/// Fidelity plus lambda g(Z); constraints are not checked here.
double factorization_objective(const FactorizationInstance& inst, const Matrix& U, const Matrix& Z);

/// Throws UsageError unless (U, Z) satisfy the constraints, with the strict
/// positivity the entropic steps need.
void check_feasible(const FactorizationInstance& inst, const Matrix& U, const Matrix& Z);

/// Seeded feasible start. U3 columns are normalised uniforms in [0.5, 1.5],
/// U1/U2 entries are standard normals (projected for U2), Z entries are
/// uniforms in [0.5, 1.5] (normals for Z1 and Z3).
void default_initialization(const FactorizationInstance& inst, std::uint64_t seed, Matrix& U, Matrix& Z);

/// Number of singular values above rel_tol times the largest one.
int numerical_rank(const Matrix& M, double rel_tol = 1e-9);

/// Random nonnegative M x N data of the form U Z + noise with U on the
/// simplex, used by the CLI and tests.
Matrix make_factorization_data(int m, int n, int rank, std::uint64_t seed, double noise = 0.01);

struct FactorizationResult {
  Matrix U;
  Matrix Z;
  /// Solver iterates stack vec(U) on top of vec(Z); see split_factors.
  SolveResult solve;
};

/// Splits a stacked solver vector into U (rows(A) x rank) and Z (rank x cols(A)).
void split_factors(const FactorizationInstance& inst, const Vector& x, Matrix& U, Matrix& Z);

/// Joint step: U and Z are both updated from the same anchor with the
/// selector-specific closed forms, then the pair is line-searched.
FactorizationResult run_factorization(const FactorizationInstance& inst, const Matrix& U0,
                                      const Matrix& Z0, const SolverConfig& cfg,
                                      const TraceSink& sink = {});

}  // namespace breg::apps
