#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breg/apps/factorization.hpp"
#include "breg/apps/regression.hpp"
#include "breg/solver.hpp"

namespace breg::cli {

enum class Command { Regress, Deblur, Factorize, CertifyConvex };

std::string_view to_string(Command c);
/// Throws UsageError for unknown names.
Command parse_command(std::string_view name);

/// Everything one CLI invocation needs. Keys in config files and flags share
/// names: `max-iters = 50` in a file, `--max-iters 50` on the command line.
struct ExperimentConfig {
  Command command = Command::Regress;
  std::uint64_t seed = 7;
  std::string trace_out;
  /// max_outer is `max-iters`; tau, gamma, delta, eta-init, eps0, tol-stat
  /// and max-linesearch map one to one.
  SolverConfig solver;

  // regress
  apps::RegressionVariant variant = apps::RegressionVariant::ProxLinearLS;
  int m = 100;
  int p = 2;
  double noise = 0.5;
  double dual_tol = 1e-3;

  // deblur, factorize and certify-convex share lambda
  double lambda = 0.1;

  // deblur
  std::string input;
  std::string kernel;
  std::string output;
  std::string truth;
  bool synthetic = false;
  int size = 64;
  double rho = 1e-3;
  double peak = 255.0;

  // factorize (rows/cols also size the certify-convex LASSO instance)
  apps::UConstraint u_constraint = apps::UConstraint::U3;
  apps::ZConstraint z_constraint = apps::ZConstraint::Z2;
  bool euclidean_z2 = false;
  int rank = 3;
  int rows = 10;
  int cols = 8;
  double tau_u = 1.0;
  double tau_z = 1.0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for one command (they differ in tau and iteration caps).
ExperimentConfig default_config(Command command);

/// Keys accepted for a command, in serialisation order.
std::vector<std::string> config_keys(Command command);

/// Parses `args` (args[0] is the subcommand, no program name). `file_text`,
/// when given, is a flat `key = value` file applied before the flags; when
/// absent a `--config PATH` flag is read from disk. Throws UsageError naming
/// the offending key, IoError when the config file cannot be read.
ExperimentConfig parse_config(const std::vector<std::string>& args,
                              const std::optional<std::string>& file_text = {});

/// `key = value` lines that parse_config({command}, text) maps back to `cfg`.
std::string serialize_config(const ExperimentConfig& cfg);

/// Range checks across all fields. Throws UsageError naming the key.
void validate(const ExperimentConfig& cfg);

}  // namespace breg::cli
