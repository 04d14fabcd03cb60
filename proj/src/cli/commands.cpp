#include "breg/cli/commands.hpp"

#include <algorithm>
#include <cstdio>

#include "breg/apps/deblur.hpp"
#include "breg/apps/factorization.hpp"
#include "breg/apps/image_io.hpp"
#include "breg/apps/lasso.hpp"
#include "breg/apps/regression.hpp"
#include "breg/cli/trace_io.hpp"
#include "breg/errors.hpp"

namespace breg::cli {

namespace {

constexpr const char* kUsage =
    "usage: breg <command> [--config PATH] [--key value ...]\n"
    "commands: regress, deblur, factorize, certify-convex\n"
    "common keys: seed, max-iters, trace-out, gamma, delta, eta-init, tau, eps0, tol-stat, max-linesearch\n"
    "regress: variant {prox-linear,prox-linear2,prox-linear-LS}, m, p, noise, dual-tol\n"
    "deblur: input, kernel, output, truth, synthetic, size, lambda, rho, peak\n"
    "factorize: u-constraint {u1,u2,u3}, z-constraint {z1,z2,z3s,z3n}, euclidean-z2, rank, rows, cols,\n"
    "           lambda, tau-u, tau-z\n"
    "certify-convex: rows, cols, lambda (fixed step 1/L, eta = 1)\n";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void report(std::ostream& out, const SolveResult& r) {
  out << "status: " << to_string(r.status.kind) << '\n'
      << "iterations: " << r.trace.size() << '\n'
      << "objective: " << num(r.f) << '\n'
      << "residual: " << num(r.status.residual) << '\n'
      << "inner iterations: " << (r.trace.empty() ? 0 : r.trace.back().cum_inner) << '\n';
  if (!r.status.message.empty()) out << "message: " << r.status.message << '\n';
}

void maybe_trace(const ExperimentConfig& cfg, const SolveResult& r) {
  if (!cfg.trace_out.empty()) emit_trace(r.trace, cfg.trace_out);
}

int run_regress(const ExperimentConfig& cfg, std::ostream& out) {
  const apps::RegressionInstance inst = apps::make_regression_instance(cfg.m, cfg.p, cfg.seed, cfg.noise);
  apps::RegressionOptions options;
  options.variant = cfg.variant;
  options.solver = cfg.solver;
  options.dual_tol = cfg.dual_tol;
  const apps::RegressionResult r = apps::run_regression(inst, apps::regression_start(cfg.p), options);
  maybe_trace(cfg, r.solve);
  report(out, r.solve);
  out << "objective at ground truth: " << num(apps::regression_objective(inst, inst.truth)) << '\n'
      << "parameters:";
  for (double v : r.u) out << ' ' << num(v);
  out << "\ntrue parameters:";
  for (double v : inst.truth) out << ' ' << num(v);
  out << "\nmax noise amplitude: " << num(inst.noise.cwiseAbs().maxCoeff()) << '\n'
      << "max parameter deviation: " << num(apps::parameter_deviation(r.u, inst.truth, cfg.p)) << '\n';
  return exit_status(r.solve.status);
}

int run_deblur(const ExperimentConfig& cfg, std::ostream& out) {
  apps::DeblurInstance inst;
  if (cfg.synthetic) {
    inst = apps::make_synthetic_deblur(cfg.size, cfg.seed, cfg.peak);
  } else {
    const apps::GrayImage img = apps::read_pgm(cfg.input);
    inst.b = img.pixels.cwiseMax(1e-6);
    inst.peak = img.maxval;
    inst.kernel = apps::gaussian_kernel(5, 1.0);
    if (!cfg.truth.empty()) inst.truth = apps::read_pgm(cfg.truth).pixels;
  }
  if (!cfg.kernel.empty()) inst.kernel = apps::read_csv_matrix(cfg.kernel);
  inst.lambda = cfg.lambda;
  inst.rho = cfg.rho;
  const apps::DeblurResult r = apps::run_deblur(inst, cfg.solver);
  maybe_trace(cfg, r.solve);
  if (!cfg.output.empty()) apps::write_pgm(cfg.output, r.u, inst.peak);
  report(out, r.solve);
  if (r.psnr) out << "psnr input: " << num(*r.input_psnr) << "\npsnr restored: " << num(*r.psnr) << '\n';
  return exit_status(r.solve.status);
}

int run_factorize(const ExperimentConfig& cfg, std::ostream& out) {
  apps::FactorizationInstance inst;
  inst.A = apps::make_factorization_data(cfg.rows, cfg.cols, cfg.rank, cfg.seed);
  inst.rank = cfg.rank;
  inst.u_constraint = cfg.u_constraint;
  inst.z_constraint = cfg.z_constraint;
  inst.euclidean_z2 = cfg.euclidean_z2;
  inst.lambda = cfg.lambda;
  inst.tau_u = cfg.tau_u;
  inst.tau_z = cfg.tau_z;
  Matrix U0, Z0;
  apps::default_initialization(inst, cfg.seed + 1, U0, Z0);
  const apps::FactorizationResult r = apps::run_factorization(inst, U0, Z0, cfg.solver);
  maybe_trace(cfg, r.solve);
  report(out, r.solve);
  const auto zeros = (r.Z.array() == 0.0).count();
  out << "zero entries in Z: " << zeros << " of " << r.Z.size() << '\n'
      << "numerical rank of Z: " << apps::numerical_rank(r.Z) << '\n';
  return exit_status(r.solve.status);
}

int run_certify(const ExperimentConfig& cfg, std::ostream& out) {
  const apps::LassoInstance inst = apps::make_lasso_instance(cfg.rows, cfg.cols, cfg.seed, cfg.lambda);
  const double L = apps::lasso_lipschitz(inst);
  SolverConfig solver = cfg.solver;
  solver.tau = 1.0 / L;
  solver.tau_min = std::min(solver.tau_min, solver.tau);
  solver.fixed_eta = 1.0;
  const Vector x0 = Vector::Zero(cfg.cols);
  const Problem problem(apps::lasso_model(inst), Geometry::euclidean(), x0);
  const SolveResult r = run(problem, solver);
  maybe_trace(cfg, r);
  const Vector x_star = apps::lasso_coordinate_descent(inst);
  const double f_star = apps::lasso_objective(inst, x_star);
  const double d0 = 0.5 * (x_star - x0).squaredNorm();
  const bool ok = convex_rate_certificate(r.trace, L, d0, f_star);
  report(out, r);
  out << "reference objective: " << num(f_star) << '\n'
      << "rate certificate: " << (ok ? "holds" : "violated") << '\n';
  return ok ? 0 : kExitCertificateViolated;
}

}  // namespace

int run_command(const ExperimentConfig& cfg, std::ostream& out) {
  switch (cfg.command) {
    case Command::Regress: return run_regress(cfg, out);
    case Command::Deblur: return run_deblur(cfg, out);
    case Command::Factorize: return run_factorize(cfg, out);
    case Command::CertifyConvex: return run_certify(cfg, out);
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? kExitUsage : 0;
  }
  if (std::find(args.begin(), args.end(), "--help") != args.end()) {
    out << kUsage;
    return 0;
  }
  try {
    const ExperimentConfig cfg = parse_config(args);
    return run_command(cfg, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SubproblemFailure& e) {
    err << "error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 5;
  }
}

}  // namespace breg::cli
