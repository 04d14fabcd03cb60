#pragma once

#include <string>
#include <vector>

#include "breg/solver.hpp"

namespace breg::cli {

inline constexpr const char* kTraceHeader = "k,f,delta,eta,ls_trials,inner,cum_inner,wall_ms";

/// Header line plus one row per record, reals with 17 significant digits.
std::string format_trace(const std::vector<IterationRecord>& records);

/// Writes format_trace(records). Throws IoError.
void emit_trace(const std::vector<IterationRecord>& records, const std::string& path);

/// Parses a file written by emit_trace. Throws IoError.
std::vector<IterationRecord> read_trace(const std::string& path);

/// 0 for both stationary kinds, 4 for MaxIterations, 5 for SubproblemFailure.
int exit_status(const TerminationStatus& status);

}  // namespace breg::cli
