#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "breg/cli/config.hpp"

namespace breg::cli {

/// Process exit codes besides exit_status(): 1 when certify-convex finds a
/// violated rate bound, 2 for usage errors, 3 for I/O errors.
inline constexpr int kExitCertificateViolated = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Runs a parsed configuration, printing a short summary to `out`.
int run_command(const ExperimentConfig& cfg, std::ostream& out);

/// Full CLI entry: parse, run, map errors to exit codes. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace breg::cli
