#include "breg/solver.hpp"

#include <chrono>
#include <cmath>

#include "breg/errors.hpp"

namespace breg {

namespace {

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void SolverConfig::validate(DomainKind domain) const {
  if (!in_open_unit(gamma)) throw UsageError("gamma must lie in (0, 1)");
  if (!in_open_unit(delta)) throw UsageError("delta must lie in (0, 1)");
  if (!(eta_init > 0) || !std::isfinite(eta_init)) throw UsageError("eta_init must be positive");
  if (!(eps0 > 0) || !std::isfinite(eps0)) throw UsageError("eps0 must be positive");
  if (max_outer < 0) throw UsageError("max_outer must be nonnegative");
  if (max_linesearch < 1) throw UsageError("max_linesearch must be at least 1");
  if (max_inner < 1) throw UsageError("max_inner must be at least 1");
  if (!(tol_stat >= 0) || !std::isfinite(tol_stat)) throw UsageError("tol_stat must be nonnegative");
  if (!(tau_min > 0) || !(tau_max >= tau_min) || !std::isfinite(tau_max)) {
    throw UsageError("need 0 < tau_min <= tau_max < inf");
  }
  auto check_tau = [&](double t) {
    if (!(t >= tau_min && t <= tau_max)) throw UsageError("tau outside [tau_min, tau_max]");
  };
  if (tau_schedule.empty()) {
    check_tau(tau);
  } else {
    for (double t : tau_schedule) check_tau(t);
  }
  if (fixed_eta && (!(*fixed_eta > 0) || !std::isfinite(*fixed_eta))) {
    throw UsageError("fixed_eta must be positive");
  }
  if (domain != DomainKind::FullSpace) {
    if (eta_init > 1.0) throw UsageError("eta_init must not exceed 1 on a restricted domain");
    if (fixed_eta && *fixed_eta > 1.0) throw UsageError("fixed_eta must not exceed 1 on a restricted domain");
  }
}

double SolverConfig::tau_at(int k) const {
  if (tau_schedule.empty()) return tau;
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(k), tau_schedule.size() - 1);
  return tau_schedule[i];
}

double SolverConfig::eps_at(int k) const {
  const double d = static_cast<double>(k) + 1.0;
  return eps0 / (d * d);
}

std::string_view to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::StationaryExact: return "stationary-exact";
    case TerminationKind::StationaryTolerance: return "stationary-tolerance";
    case TerminationKind::MaxIterations: return "max-iterations";
    case TerminationKind::SubproblemFailure: return "subproblem-failure";
  }
  return "unknown";
}

LineSearchResult line_search(const Objective& objective, const Vector& x, double fx, const Vector& y,
                             double delta, const InteriorTest& interior, const SolverConfig& cfg) {
  if (!(delta < 0)) throw UsageError("line search needs Delta < 0");
  if (x.size() != y.size()) throw UsageError("dimension mismatch in line search");
  const Vector dir = y - x;
  double eta = cfg.eta_init;
  for (int j = 0; j < cfg.max_linesearch; ++j) {
    const Vector trial = x + eta * dir;
    if (interior(trial)) {
      const double ft = objective(trial);
      if (ft <= fx + cfg.gamma * eta * delta) return {eta, j + 1, ft};
    }
    eta *= cfg.delta;
  }
  throw SubproblemFailure("line search exceeded its trial cap", x);
}

LineSearchResult line_search(const Objective& objective, const Vector& x, const Vector& y,
                             double delta, const Geometry& geom, const SolverConfig& cfg) {
  return line_search(objective, x, objective(x), y, delta,
                     [&geom](const Vector& v) { return geom.in_interior(v); }, cfg);
}

SolveResult minimize(const Objective& objective, const StepOracle& oracle, const InteriorTest& interior,
                     const Vector& x0, const SolverConfig& cfg, const TraceSink& sink) {
  SolveResult out;
  out.x = x0;
  out.f = objective(x0);
  if (!std::isfinite(out.f)) throw UsageError("initial point is outside dom f");
  if (!interior(x0)) throw UsageError("initial point is outside int dom h");

  if (cfg.record_iterates) out.iterates.push_back(x0);
  long long cum_inner = 0;
  auto emit = [&](const IterationRecord& rec) {
    out.trace.push_back(rec);
    if (sink) sink(rec);
  };

  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto start = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.k = k;
    rec.f = out.f;

    ProxStepResult step;
    try {
      step = oracle(k, out.x, out.f, cfg.eps_at(k), cfg.tau_at(k));
    } catch (const SubproblemFailure& e) {
      out.status = {TerminationKind::SubproblemFailure, out.status.residual, e.what()};
      return out;
    }
    cum_inner += step.inner_iterations;
    rec.delta = step.delta;
    rec.inner = step.inner_iterations;
    rec.cum_inner = cum_inner;
    out.status.residual = (step.candidate - out.x).norm() / step.scale;

    if (step.stationary || !(step.delta < -cfg.tol_stat)) {
      const bool exact = step.certificate == Certificate::Exact && step.delta >= 0.0;
      out.status.kind = exact ? TerminationKind::StationaryExact : TerminationKind::StationaryTolerance;
      rec.wall_ms = elapsed_ms(start);
      emit(rec);
      return out;
    }

    double eta = 0.0;
    double f_new = 0.0;
    if (cfg.fixed_eta) {
      eta = *cfg.fixed_eta;
      const Vector next = out.x + eta * (step.candidate - out.x);
      if (!interior(next)) {
        out.status = {TerminationKind::SubproblemFailure, out.status.residual,
                      "fixed step left int dom h"};
        return out;
      }
      f_new = objective(next);
      rec.ls_trials = 0;
      out.x = next;
    } else {
      try {
        const LineSearchResult ls =
            line_search(objective, out.x, out.f, step.candidate, step.delta, interior, cfg);
        eta = ls.eta;
        f_new = ls.f_new;
        rec.ls_trials = ls.trials;
      } catch (const SubproblemFailure& e) {
        rec.ls_trials = cfg.max_linesearch;
        rec.wall_ms = elapsed_ms(start);
        emit(rec);
        out.status = {TerminationKind::SubproblemFailure, out.status.residual, e.what()};
        return out;
      }
      out.x += eta * (step.candidate - out.x);
    }
    out.f = f_new;
    if (cfg.record_iterates) out.iterates.push_back(out.x);
    rec.eta = eta;
    rec.wall_ms = elapsed_ms(start);
    emit(rec);
  }
  out.status.kind = TerminationKind::MaxIterations;
  return out;
}

SolveResult run(const Problem& problem, const SolverConfig& cfg, const TraceSink& sink) {
  cfg.validate(problem.geometry.domain());
  const Model& model = problem.model;
  const Geometry& base = problem.geometry;
  SubsolverOptions options;
  options.max_inner = cfg.max_inner;
  options.tol_stat = cfg.tol_stat;

  const Objective objective = [&model](const Vector& x) { return model.objective(x); };
  const StepOracle oracle = [&](int, const Vector& x, double, double eps, double tau) {
    return prox_step(model.anchor(x), base.scaled(tau), eps, options);
  };
  const InteriorTest interior = [&base](const Vector& x) { return base.in_interior(x); };
  return minimize(objective, oracle, interior, problem.x0, cfg, sink);
}

bool convex_rate_certificate(const std::vector<IterationRecord>& trace, double L, double D0,
                             double f_star) {
  for (const IterationRecord& r : trace) {
    if (r.k < 1) continue;
    if (!(r.f - f_star <= L * D0 / (2.0 * r.k) + 1e-9)) return false;
  }
  return true;
}

bool descent_summability_check(const std::vector<IterationRecord>& trace, double f0, double f_final,
                               double gamma) {
  double sum = 0.0;
  for (const IterationRecord& r : trace) sum += r.eta * (-r.delta);
  return gamma * sum <= f0 - f_final + 1e-9;
}

int count_descent_violations(const std::vector<IterationRecord>& trace, double gamma,
                             std::optional<double> f_final) {
  int violations = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const IterationRecord& r = trace[i];
    if (r.eta <= 0) continue;
    if (!(r.delta < 0)) {
      ++violations;
      continue;
    }
    std::optional<double> next;
    if (i + 1 < trace.size()) {
      next = trace[i + 1].f;
    } else {
      next = f_final;
    }
    if (next && !(*next <= r.f + gamma * r.eta * r.delta)) ++violations;
  }
  return violations;
}

}  // namespace breg
