#include "breg/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "breg/errors.hpp"

namespace breg::cli {

namespace {

struct KeySpec {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool is_flag = false;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalise_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw UsageError("invalid value for '" + key + "': " + v);
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw UsageError("invalid value for '" + key + "': " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("invalid value for '" + key + "': " + v);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T rethrow_named(const std::string& key, const std::function<T()>& f) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError("invalid value for '" + key + "': " + e.what());
  }
}

KeySpec real_key(const std::string& name, double ExperimentConfig::*field) {
  return {name, [name, field](ExperimentConfig& c, const std::string& v) { c.*field = to_double(name, v); },
          [field](const ExperimentConfig& c) { return fmt(c.*field); }};
}

KeySpec solver_real_key(const std::string& name, double SolverConfig::*field) {
  return {name,
          [name, field](ExperimentConfig& c, const std::string& v) { c.solver.*field = to_double(name, v); },
          [field](const ExperimentConfig& c) { return fmt(c.solver.*field); }};
}

KeySpec int_key(const std::string& name, int ExperimentConfig::*field) {
  return {name, [name, field](ExperimentConfig& c, const std::string& v) { c.*field = to_int<int>(name, v); },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

KeySpec string_key(const std::string& name, std::string ExperimentConfig::*field) {
  return {name, [field](ExperimentConfig& c, const std::string& v) { c.*field = v; },
          [field](const ExperimentConfig& c) { return c.*field; }};
}

KeySpec bool_key(const std::string& name, bool ExperimentConfig::*field) {
  return {name, [name, field](ExperimentConfig& c, const std::string& v) { c.*field = to_bool(name, v); },
          [field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); }, true};
}

std::vector<KeySpec> key_specs(Command command) {
  std::vector<KeySpec> keys;
  keys.push_back({"seed",
                  [](ExperimentConfig& c, const std::string& v) { c.seed = to_int<std::uint64_t>("seed", v); },
                  [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
  keys.push_back({"max-iters",
                  [](ExperimentConfig& c, const std::string& v) { c.solver.max_outer = to_int<int>("max-iters", v); },
                  [](const ExperimentConfig& c) { return std::to_string(c.solver.max_outer); }});
  keys.push_back(string_key("trace-out", &ExperimentConfig::trace_out));
  keys.push_back(solver_real_key("eps0", &SolverConfig::eps0));
  keys.push_back(solver_real_key("tol-stat", &SolverConfig::tol_stat));
  if (command != Command::CertifyConvex) {
    keys.push_back(solver_real_key("gamma", &SolverConfig::gamma));
    keys.push_back(solver_real_key("delta", &SolverConfig::delta));
    keys.push_back(solver_real_key("eta-init", &SolverConfig::eta_init));
    keys.push_back(solver_real_key("tau", &SolverConfig::tau));
    keys.push_back({"max-linesearch",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.solver.max_linesearch = to_int<int>("max-linesearch", v);
                    },
                    [](const ExperimentConfig& c) { return std::to_string(c.solver.max_linesearch); }});
  }
  switch (command) {
    case Command::Regress:
      keys.push_back({"variant",
                      [](ExperimentConfig& c, const std::string& v) {
                        c.variant = rethrow_named<apps::RegressionVariant>(
                            "variant", [&] { return apps::parse_regression_variant(v); });
                      },
                      [](const ExperimentConfig& c) { return std::string(apps::to_string(c.variant)); }});
      keys.push_back(int_key("m", &ExperimentConfig::m));
      keys.push_back(int_key("p", &ExperimentConfig::p));
      keys.push_back(real_key("noise", &ExperimentConfig::noise));
      keys.push_back(real_key("dual-tol", &ExperimentConfig::dual_tol));
      break;
    case Command::Deblur:
      keys.push_back(string_key("input", &ExperimentConfig::input));
      keys.push_back(string_key("kernel", &ExperimentConfig::kernel));
      keys.push_back(string_key("output", &ExperimentConfig::output));
      keys.push_back(string_key("truth", &ExperimentConfig::truth));
      keys.push_back(bool_key("synthetic", &ExperimentConfig::synthetic));
      keys.push_back(int_key("size", &ExperimentConfig::size));
      keys.push_back(real_key("lambda", &ExperimentConfig::lambda));
      keys.push_back(real_key("rho", &ExperimentConfig::rho));
      keys.push_back(real_key("peak", &ExperimentConfig::peak));
      break;
    case Command::Factorize:
      keys.push_back({"u-constraint",
                      [](ExperimentConfig& c, const std::string& v) {
                        c.u_constraint = rethrow_named<apps::UConstraint>(
                            "u-constraint", [&] { return apps::parse_u_constraint(v); });
                      },
                      [](const ExperimentConfig& c) { return std::string(apps::to_string(c.u_constraint)); }});
      keys.push_back({"z-constraint",
                      [](ExperimentConfig& c, const std::string& v) {
                        c.z_constraint = rethrow_named<apps::ZConstraint>(
                            "z-constraint", [&] { return apps::parse_z_constraint(v); });
                      },
                      [](const ExperimentConfig& c) { return std::string(apps::to_string(c.z_constraint)); }});
      keys.push_back(bool_key("euclidean-z2", &ExperimentConfig::euclidean_z2));
      keys.push_back(int_key("rank", &ExperimentConfig::rank));
      keys.push_back(int_key("rows", &ExperimentConfig::rows));
      keys.push_back(int_key("cols", &ExperimentConfig::cols));
      keys.push_back(real_key("lambda", &ExperimentConfig::lambda));
      keys.push_back(real_key("tau-u", &ExperimentConfig::tau_u));
      keys.push_back(real_key("tau-z", &ExperimentConfig::tau_z));
      break;
    case Command::CertifyConvex:
      keys.push_back(int_key("rows", &ExperimentConfig::rows));
      keys.push_back(int_key("cols", &ExperimentConfig::cols));
      keys.push_back(real_key("lambda", &ExperimentConfig::lambda));
      break;
  }
  return keys;
}

const KeySpec& find_key(const std::vector<KeySpec>& keys, const std::string& name, Command command) {
  for (const KeySpec& k : keys) {
    if (k.name == name) return k;
  }
  throw UsageError("unknown key '" + name + "' for command " + std::string(to_string(command)));
}

std::map<std::string, std::string> parse_file(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + " is not 'key = value'");
    }
    const std::string key = normalise_key(trim(body.substr(0, eq)));
    if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + " has an empty key");
    out[key] = trim(body.substr(eq + 1));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Regress: return "regress";
    case Command::Deblur: return "deblur";
    case Command::Factorize: return "factorize";
    case Command::CertifyConvex: return "certify-convex";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  if (name == "regress") return Command::Regress;
  if (name == "deblur") return Command::Deblur;
  if (name == "factorize") return Command::Factorize;
  if (name == "certify-convex") return Command::CertifyConvex;
  throw UsageError("unknown command '" + std::string(name) + "'");
}

ExperimentConfig default_config(Command command) {
  ExperimentConfig c;
  c.command = command;
  switch (command) {
    case Command::Regress:
      c.solver.max_outer = 500;
      c.solver.tau = 10.0;
      break;
    case Command::Deblur:
      c.solver.max_outer = 200;
      c.solver.tau = 0.05;
      c.lambda = 1.0;
      break;
    case Command::Factorize:
      c.solver.max_outer = 200;
      break;
    case Command::CertifyConvex:
      c.solver.max_outer = 500;
      c.solver.fixed_eta = 1.0;
      c.rows = 20;
      c.cols = 10;
      break;
  }
  return c;
}

std::vector<std::string> config_keys(Command command) {
  std::vector<std::string> out;
  for (const KeySpec& k : key_specs(command)) out.push_back(k.name);
  return out;
}

ExperimentConfig parse_config(const std::vector<std::string>& args, const std::optional<std::string>& file_text) {
  if (args.empty()) throw UsageError("missing command");
  const Command command = parse_command(args.front());
  const std::vector<KeySpec> keys = key_specs(command);

  CLI::App app{"breg " + std::string(to_string(command))};
  app.set_help_flag();
  app.allow_extras(false);
  std::string config_path;
  app.add_option("--config", config_path);
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, bool> flag_switches;
  for (const KeySpec& k : keys) {
    if (k.is_flag) {
      flag_switches[k.name] = false;
      options[k.name] = app.add_flag("--" + k.name, flag_switches[k.name]);
    } else {
      flag_values[k.name];
      options[k.name] = app.add_option("--" + k.name, flag_values[k.name]);
    }
  }
  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()));
  }

  ExperimentConfig cfg = default_config(command);
  std::optional<std::string> text = file_text;
  if (!text && !config_path.empty()) text = read_file(config_path);
  if (text) {
    for (const auto& [key, value] : parse_file(*text)) find_key(keys, key, command).set(cfg, value);
  }
  for (const KeySpec& k : keys) {
    if (options[k.name]->count() == 0) continue;
    k.set(cfg, k.is_flag ? std::string("true") : flag_values[k.name]);
  }
  validate(cfg);
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const KeySpec& k : key_specs(cfg.command)) out << k.name << " = " << k.get(cfg) << '\n';
  return out.str();
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw UsageError(std::string("invalid value for '") + key + "': " + what);
  };
  const SolverConfig& s = cfg.solver;
  require(s.gamma > 0 && s.gamma < 1, "gamma", "must lie in (0, 1)");
  require(s.delta > 0 && s.delta < 1, "delta", "must lie in (0, 1)");
  require(s.eta_init > 0, "eta-init", "must be positive");
  require(s.tau > 0, "tau", "must be positive");
  require(s.eps0 > 0, "eps0", "must be positive");
  require(s.tol_stat >= 0, "tol-stat", "must be nonnegative");
  require(s.max_outer >= 0, "max-iters", "must be nonnegative");
  require(s.max_linesearch >= 1, "max-linesearch", "must be at least 1");

  DomainKind domain = DomainKind::FullSpace;
  switch (cfg.command) {
    case Command::Regress:
      require(cfg.m >= 1, "m", "must be at least 1");
      require(cfg.p >= 1 && cfg.p <= 8, "p", "must lie in [1, 8]");
      require(cfg.noise >= 0, "noise", "must be nonnegative");
      require(cfg.dual_tol > 0, "dual-tol", "must be positive");
      break;
    case Command::Deblur:
      domain = DomainKind::PositiveOrthant;
      require(cfg.synthetic || !cfg.input.empty(), "input", "required unless --synthetic is given");
      require(cfg.size >= 8, "size", "must be at least 8");
      require(cfg.lambda >= 0, "lambda", "must be nonnegative");
      require(cfg.rho >= 0, "rho", "must be nonnegative");
      require(cfg.peak > 0, "peak", "must be positive");
      break;
    case Command::Factorize:
      if (cfg.u_constraint == apps::UConstraint::U3 ||
          (cfg.z_constraint == apps::ZConstraint::Z2 && !cfg.euclidean_z2)) {
        domain = DomainKind::PositiveOrthant;
      }
      require(cfg.rows >= 1, "rows", "must be at least 1");
      require(cfg.cols >= 1, "cols", "must be at least 1");
      require(cfg.rank >= 1 && cfg.rank <= std::min(cfg.rows, cfg.cols), "rank", "must lie in [1, min(rows, cols)]");
      require(cfg.lambda >= 0, "lambda", "must be nonnegative");
      require(cfg.tau_u > 0, "tau-u", "must be positive");
      require(cfg.tau_z > 0, "tau-z", "must be positive");
      break;
    case Command::CertifyConvex:
      require(cfg.rows >= 1, "rows", "must be at least 1");
      require(cfg.cols >= 1, "cols", "must be at least 1");
      require(cfg.lambda >= 0, "lambda", "must be nonnegative");
      break;
  }
  if (domain != DomainKind::FullSpace) require(s.eta_init <= 1.0, "eta-init", "must not exceed 1 here");
  s.validate(domain);
}

}  // namespace breg::cli
