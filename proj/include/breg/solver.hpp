#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breg/geometry.hpp"
#include "breg/model.hpp"
#include "breg/subsolvers.hpp"
#include "breg/types.hpp"

namespace breg {

struct SolverConfig {
  /// Armijo constant of the sufficient-decrease test.
  double gamma = 0.5;
  /// Backtracking factor: trial j uses eta_init * delta^j.
  double delta = 0.5;
  double eta_init = 1.0;
  /// Subproblem tolerance eps_k = eps0 / (k + 1)^2.
  double eps0 = 1e-2;
  int max_outer = 1000;
  int max_linesearch = 60;
  int max_inner = 20000;
  /// Delta > -tol_stat counts as stationary.
  double tol_stat = 1e-10;
  /// Geometry scale used when tau_schedule is empty.
  double tau = 1.0;
  /// Per-iteration scales; the last entry repeats once the schedule runs out.
  std::vector<double> tau_schedule;
  double tau_min = 1e-12;
  double tau_max = 1e12;
  /// Skips the line search and always steps with this eta.
  std::optional<double> fixed_eta;
  /// Keeps every iterate x_0, x_1, ... in SolveResult::iterates.
  bool record_iterates = false;

  /// Throws UsageError on out-of-range fields. Entropic domains additionally
  /// require eta_init <= 1 (and fixed_eta <= 1).
  void validate(DomainKind domain = DomainKind::FullSpace) const;
  double tau_at(int k) const;
  double eps_at(int k) const;

  bool operator==(const SolverConfig&) const = default;
};

/// One outer iteration. `f` is f(x_k) before the step; the terminating record
/// of a stationary run has eta = 0.
struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  int ls_trials = 0;
  int inner = 0;
  long long cum_inner = 0;
  double wall_ms = 0.0;
};

enum class TerminationKind { StationaryExact, StationaryTolerance, MaxIterations, SubproblemFailure };

std::string_view to_string(TerminationKind kind);

struct TerminationStatus {
  TerminationKind kind = TerminationKind::MaxIterations;
  /// |y_k - x_k| / tau_k of the last computed step.
  double residual = 0.0;
  std::string message;
};

struct SolveResult {
  Vector x;
  double f = 0.0;
  TerminationStatus status;
  std::vector<IterationRecord> trace;
  /// Every iterate, x_0 first, when SolverConfig::record_iterates is set.
  std::vector<Vector> iterates;
};

using TraceSink = std::function<void(const IterationRecord&)>;
using Objective = std::function<double(const Vector&)>;
using InteriorTest = std::function<bool(const Vector&)>;

struct LineSearchResult {
  double eta = 0.0;
  int trials = 0;
  /// f(x + eta (y - x)).
  double f_new = 0.0;
};

/// Smallest j with eta = eta_init delta^j such that x + eta (y - x) is
/// interior and f(x + eta (y - x)) <= fx + gamma eta Delta. trials = j + 1.
/// Throws UsageError unless Delta < 0, SubproblemFailure after
/// cfg.max_linesearch trials.
LineSearchResult line_search(const Objective& objective, const Vector& x, double fx, const Vector& y,
                             double delta, const InteriorTest& interior, const SolverConfig& cfg);
LineSearchResult line_search(const Objective& objective, const Vector& x, const Vector& y,
                             double delta, const Geometry& geom, const SolverConfig& cfg);

/// Produces the step candidate at iterate x for outer index k.
using StepOracle =
    std::function<ProxStepResult(int k, const Vector& x, double fx, double eps, double tau)>;

/// Outer loop over an arbitrary step oracle: stationarity test on Delta, line
/// search (or fixed eta), update, one trace record per iteration.
SolveResult minimize(const Objective& objective, const StepOracle& oracle, const InteriorTest& interior,
                     const Vector& x0, const SolverConfig& cfg, const TraceSink& sink = {});

/// minimize() with the model's anchored surrogate and prox_step.
SolveResult run(const Problem& problem, const SolverConfig& cfg, const TraceSink& sink = {});

/// True iff f_k - f_star <= L D0 / (2k) + 1e-9 for every record with k >= 1.
bool convex_rate_certificate(const std::vector<IterationRecord>& trace, double L, double D0,
                             double f_star);

/// True iff gamma * sum eta_k (-Delta_k) <= f0 - f_final + 1e-9.
bool descent_summability_check(const std::vector<IterationRecord>& trace, double f0, double f_final,
                               double gamma);

/// Number of steps with eta > 0 violating f_{k+1} <= f_k + gamma eta_k Delta_k
/// or Delta_k < 0. The step out of the last record is compared with f_final
/// when given.
int count_descent_violations(const std::vector<IterationRecord>& trace, double gamma,
                             std::optional<double> f_final = {});

}  // namespace breg
