#include "breg/cli/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "breg/errors.hpp"

namespace breg::cli {

std::string format_trace(const std::vector<IterationRecord>& records) {
  std::string out = std::string(kTraceHeader) + "\n";
  char buf[256];
  for (const IterationRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d,%d,%lld,%.17g\n", r.k, r.f, r.delta, r.eta,
                  r.ls_trials, r.inner, r.cum_inner, r.wall_ms);
    out += buf;
  }
  return out;
}

void emit_trace(const std::vector<IterationRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open trace file " + path);
  out << format_trace(records);
  out.flush();
  if (!out) throw IoError("write failed for trace file " + path);
}

std::vector<IterationRecord> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw IoError("bad trace header in " + path);
  std::vector<IterationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    IterationRecord r;
    int used = 0;
    const int n = std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%d,%d,%lld,%lf%n", &r.k, &r.f, &r.delta, &r.eta,
                              &r.ls_trials, &r.inner, &r.cum_inner, &r.wall_ms, &used);
    if (n != 8 || static_cast<std::size_t>(used) != line.size()) throw IoError("malformed trace row in " + path);
    out.push_back(r);
  }
  return out;
}

int exit_status(const TerminationStatus& status) {
  switch (status.kind) {
    case TerminationKind::StationaryExact:
    case TerminationKind::StationaryTolerance: return 0;
    case TerminationKind::MaxIterations: return 4;
    case TerminationKind::SubproblemFailure: return 5;
  }
  return 5;
}

}  // namespace breg::cli
