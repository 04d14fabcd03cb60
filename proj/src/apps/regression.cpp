#include "breg/apps/regression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "breg/errors.hpp"
#include "breg/rng.hpp"
#include "breg/subsolvers.hpp"

namespace breg::apps {

namespace {

constexpr double kMaxExponent = 700.0;

void check_parameters(const RegressionInstance& inst, const Vector& u) {
  if (u.size() != 2 * inst.terms) throw UsageError("parameter vector must have length 2P");
  if (!u.allFinite()) throw UsageError("non-finite regression parameters");
}

double exp_clamped(double e, bool& clamped) {
  if (e > kMaxExponent) {
    clamped = true;
    e = kMaxExponent;
  }
  return std::exp(e);
}

struct Subproblem {
  Vector y;
  double delta = 0.0;
  int iterations = 0;
};

// The step-difference rule can stop the dual iteration at a point with
// Delta >= 0 long before the subproblem is solved. Since the optimal Delta is
// at least Delta(y) - gap and never positive, stationarity is accepted only
// once gap <= Delta(y) + tol_stat; until then the solve continues with a
// shrinking gap target, stopping early as soon as Delta(y) < -tol_stat.
Subproblem solve_subproblem(const ResidualJacobian& rj, const Vector& anchor, double fx, double tau,
                            double dual_tol, double tol_stat, Vector& warm) {
  const Vector target = rj.jacobian * anchor - rj.residual;
  auto improvement = [&](const Vector& y) {
    const Vector d = y - anchor;
    return (rj.residual + rj.jacobian * d).cwiseAbs().sum() + d.squaredNorm() / (2.0 * tau) - fx;
  };
  DualL1Options options;
  options.tol = dual_tol;
  DualL1Result r = dual_l1_affine_solver(rj.jacobian, target, anchor, tau, options, &warm);
  Subproblem out;
  out.iterations = r.iterations;
  out.delta = improvement(r.u);
  while (!(out.delta < -tol_stat) && r.duality_gap > out.delta + tol_stat) {
    DualL1Options refine;
    refine.tol = kInfinity;
    refine.gap_target = std::max(0.25 * r.duality_gap, out.delta + tol_stat);
    refine.accelerated = true;
    r = dual_l1_affine_solver(rj.jacobian, target, anchor, tau, refine, &r.dual);
    out.iterations += r.iterations;
    out.delta = improvement(r.u);
  }
  warm = r.dual;
  out.y = r.u;
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Finds the largest tau = tau0 delta^j whose first step descends without halving.
double probe_initial_tau(const RegressionInstance& inst, const Vector& u0, const RegressionOptions& o) {
  const SolverConfig& cfg = o.solver;
  const ResidualJacobian rj = regression_residual_and_jacobian(inst, u0);
  const double fx = rj.residual.cwiseAbs().sum();
  Vector warm = Vector::Zero(rj.residual.size());
  double tau = cfg.tau;
  for (int j = 0; j < cfg.max_linesearch; ++j) {
    const Subproblem s = solve_subproblem(rj, u0, fx, tau, o.dual_tol, cfg.tol_stat, warm);
    if (s.delta >= -cfg.tol_stat) return tau;
    if (regression_objective(inst, s.y) <= fx + cfg.gamma * s.delta) return tau;
    tau *= cfg.delta;
  }
  return tau;
}

SolveResult run_prox_descent(const RegressionInstance& inst, const Vector& u0, double tau0,
                             const RegressionOptions& o, const TraceSink& sink, double& tau_out) {
  const SolverConfig& cfg = o.solver;
  SolveResult out;
  out.x = u0;
  out.f = regression_objective(inst, u0);
  Vector warm = Vector::Zero(inst.x.size());
  double tau = tau0;
  long long cum_inner = 0;

  auto emit = [&](const IterationRecord& rec) {
    out.trace.push_back(rec);
    if (sink) sink(rec);
  };

  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const ResidualJacobian rj = regression_residual_and_jacobian(inst, out.x);
    IterationRecord rec;
    rec.k = k;
    rec.f = out.f;
    bool accepted = false;
    Subproblem s;
    double fy = 0.0;
    for (int trial = 1; trial <= cfg.max_linesearch; ++trial) {
      try {
        s = solve_subproblem(rj, out.x, out.f, tau, o.dual_tol, cfg.tol_stat, warm);
      } catch (const SubproblemFailure& e) {
        out.status = {TerminationKind::SubproblemFailure, out.status.residual, e.what()};
        tau_out = tau;
        return out;
      }
      rec.inner += s.iterations;
      rec.ls_trials = trial;
      rec.delta = s.delta;
      out.status.residual = (s.y - out.x).norm() / tau;
      if (!(s.delta < -cfg.tol_stat)) {
        cum_inner += rec.inner;
        rec.cum_inner = cum_inner;
        rec.wall_ms = elapsed_ms(start);
        emit(rec);
        out.status.kind = TerminationKind::StationaryTolerance;
        tau_out = tau;
        return out;
      }
      fy = regression_objective(inst, s.y);
      if (fy <= out.f + cfg.gamma * s.delta) {
        accepted = true;
        break;
      }
      tau *= cfg.delta;
    }
    cum_inner += rec.inner;
    rec.cum_inner = cum_inner;
    if (!accepted) {
      rec.wall_ms = elapsed_ms(start);
      emit(rec);
      out.status = {TerminationKind::SubproblemFailure, out.status.residual,
                    "scale backtracking exceeded its trial cap"};
      tau_out = tau;
      return out;
    }
    out.x = s.y;
    out.f = fy;
    rec.eta = 1.0;
    rec.wall_ms = elapsed_ms(start);
    emit(rec);
  }
  out.status.kind = TerminationKind::MaxIterations;
  tau_out = tau;
  return out;
}

}  // namespace

RegressionInstance make_regression_instance(int m, int p, std::uint64_t seed, double noise_scale) {
  if (m < 1 || p < 1) throw UsageError("regression needs M >= 1 and P >= 1");
  if (!(noise_scale >= 0) || !std::isfinite(noise_scale)) throw UsageError("noise scale must be >= 0");
  SplitMix64 rng(seed);
  RegressionInstance inst;
  inst.terms = p;
  inst.x = m == 1 ? Vector(Vector::Zero(1)) : Vector(Vector::LinSpaced(m, 0.0, 5.0));
  inst.truth.resize(2 * p);
  // Rates live in disjoint bands so the exponentials stay distinguishable.
  for (int j = 0; j < p; ++j) inst.truth[j] = std::pow(5.0, j) * rng.uniform(0.4, 0.8);
  for (int j = 0; j < p; ++j) inst.truth[p + j] = rng.uniform(2.0, 6.0);
  inst.noise.resize(m);
  for (int i = 0; i < m; ++i) inst.noise[i] = noise_scale > 0 ? rng.laplace(noise_scale) : 0.0;
  inst.y = Vector::Zero(m);
  const ResidualJacobian clean = regression_residual_and_jacobian(inst, inst.truth);
  inst.y = clean.residual + inst.noise;
  return inst;
}

ResidualJacobian regression_residual_and_jacobian(const RegressionInstance& inst, const Vector& u) {
  check_parameters(inst, u);
  const Eigen::Index m = inst.x.size();
  const int p = inst.terms;
  ResidualJacobian out;
  out.residual.resize(m);
  out.jacobian.resize(m, 2 * p);
  for (Eigen::Index i = 0; i < m; ++i) {
    double fi = 0.0;
    for (int j = 0; j < p; ++j) {
      const double e = exp_clamped(-u[j] * inst.x[i], out.clamped);
      fi += u[p + j] * e;
      out.jacobian(i, j) = -u[p + j] * inst.x[i] * e;
      out.jacobian(i, p + j) = e;
    }
    out.residual[i] = fi - inst.y[i];
  }
  return out;
}

double regression_objective(const RegressionInstance& inst, const Vector& u) {
  check_parameters(inst, u);
  bool clamped = false;
  double total = 0.0;
  for (Eigen::Index i = 0; i < inst.x.size(); ++i) {
    double fi = 0.0;
    for (int j = 0; j < inst.terms; ++j) {
      fi += u[inst.terms + j] * exp_clamped(-u[j] * inst.x[i], clamped);
    }
    total += std::abs(fi - inst.y[i]);
  }
  return total;
}

double regression_growth_constant(const RegressionInstance& inst, double a_lo, double b_max) {
  if (!(b_max >= 0)) throw UsageError("b_max must be nonnegative");
  double total = 0.0;
  for (double xi : inst.x) {
    total += std::abs(xi) * std::exp(-a_lo * xi) * std::sqrt(b_max * b_max * xi * xi + 2.0);
  }
  return total;
}

Model regression_model(const RegressionInstance& inst, double a_lo, double b_max) {
  SmoothMap F;
  F.value = [inst](const Vector& u) { return regression_residual_and_jacobian(inst, u).residual; };
  F.jacobian = [inst](const Vector& u) { return regression_residual_and_jacobian(inst, u).jacobian; };
  return Model::prox_linear(ConvexTerm::zero(), OuterFunction::l1(), std::move(F),
                            GrowthFunction::quadratic(regression_growth_constant(inst, a_lo, b_max)));
}

Vector regression_start(int p) {
  if (p < 1) throw UsageError("P must be positive");
  Vector u(2 * p);
  u.head(p) = p == 1 ? Vector(Vector::Constant(1, 1.25)) : Vector(Vector::LinSpaced(p, 0.75, 1.75));
  u.tail(p).setConstant(0.5);
  return u;
}

std::string_view to_string(RegressionVariant v) {
  switch (v) {
    case RegressionVariant::ProxLinear: return "prox-linear";
    case RegressionVariant::ProxLinear2: return "prox-linear2";
    case RegressionVariant::ProxLinearLS: return "prox-linear-LS";
  }
  return "unknown";
}

RegressionVariant parse_regression_variant(std::string_view name) {
  if (name == "prox-linear") return RegressionVariant::ProxLinear;
  if (name == "prox-linear2") return RegressionVariant::ProxLinear2;
  if (name == "prox-linear-LS") return RegressionVariant::ProxLinearLS;
  throw UsageError("unknown regression variant: " + std::string(name));
}

RegressionResult run_regression(const RegressionInstance& inst, const Vector& u0,
                                const RegressionOptions& options, const TraceSink& sink) {
  const SolverConfig& cfg = options.solver;
  cfg.validate();
  if (!(options.dual_tol > 0)) throw UsageError("dual tolerance must be positive");
  check_parameters(inst, u0);
  if (inst.y.size() != inst.x.size()) throw UsageError("covariates and observations differ in length");

  RegressionResult out;
  if (options.variant == RegressionVariant::ProxLinearLS) {
    Vector warm = Vector::Zero(inst.x.size());
    const Objective objective = [&inst](const Vector& u) { return regression_objective(inst, u); };
    const StepOracle oracle = [&](int, const Vector& x, double fx, double, double tau) {
      const ResidualJacobian rj = regression_residual_and_jacobian(inst, x);
      const Subproblem s = solve_subproblem(rj, x, fx, tau, options.dual_tol, cfg.tol_stat, warm);
      ProxStepResult step;
      step.candidate = s.y;
      step.delta = s.delta;
      step.inner_iterations = s.iterations;
      step.certificate = Certificate::DualityGap;
      step.stationary = !(s.delta < -cfg.tol_stat);
      step.scale = tau;
      return step;
    };
    out.solve = minimize(objective, oracle, [](const Vector&) { return true; }, u0, cfg, sink);
    out.final_tau = cfg.tau_at(static_cast<int>(out.solve.trace.size()));
  } else {
    double tau0 = cfg.tau;
    if (options.variant == RegressionVariant::ProxLinear2) tau0 = probe_initial_tau(inst, u0, options);
    out.solve = run_prox_descent(inst, u0, tau0, options, sink, out.final_tau);
  }
  out.u = out.solve.x;
  return out;
}

long long inner_iterations_to_reach(const SolveResult& result, double target) {
  const auto& trace = result.trace;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].f <= target) return i == 0 ? 0 : trace[i - 1].cum_inner;
  }
  if (result.f <= target) return trace.empty() ? 0 : trace.back().cum_inner;
  return -1;
}

double parameter_deviation(const Vector& u, const Vector& truth, int p) {
  if (u.size() != 2 * p || truth.size() != 2 * p) throw UsageError("parameter length must be 2P");
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInfinity;
  do {
    double dev = 0.0;
    for (int j = 0; j < p; ++j) {
      dev = std::max(dev, std::abs(u[perm[j]] - truth[j]));
      dev = std::max(dev, std::abs(u[p + perm[j]] - truth[p + j]));
    }
    best = std::min(best, dev);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace breg::apps
