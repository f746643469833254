#ifndef CAYLEY_JOB_HPP
#define CAYLEY_JOB_HPP

// Flat key = value job files, dispatch to the library, JSON / CSV reports.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cayley/analytic.hpp"
#include "cayley/integral_operator.hpp"
#include "cayley/kernel.hpp"
#include "cayley/solver.hpp"
#include "cayley/tree_oracle.hpp"

#ifndef CAYLEY_VERSION
#define CAYLEY_VERSION "0.0.0"
#endif

namespace cayley {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = CAYLEY_VERSION;
inline constexpr int kReportSchema = 1;

enum class ExitCode : int { success = 0, not_converged = 1, config_error = 2 };

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { parse_error, validation_error };

  ConfigError(Kind kind, std::string message, int line = 0, std::string key = {})
      : std::runtime_error(format(kind, message, line, key)),
        kind_(kind),
        line_(line),
        key_(std::move(key)),
        message_(std::move(message)) {}

  Kind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }
  const std::string& message() const noexcept { return message_; }

  json to_json() const {
    json j;
    j["kind"] = kind_ == Kind::parse_error ? "parse_error" : "validation_error";
    if (line_ > 0) j["line"] = line_;
    if (!key_.empty()) j["key"] = key_;
    j["message"] = message_;
    return j;
  }

 private:
  static std::string format(Kind kind, const std::string& message, int line, const std::string& key) {
    std::string s = kind == Kind::parse_error ? "parse error" : "validation error";
    if (line > 0) s += " at line " + std::to_string(line);
    if (!key.empty()) s += " (" + key + ")";
    return s + ": " + message;
  }

  Kind kind_;
  int line_;
  std::string key_;
  std::string message_;
};

enum class OutputFormat { json, csv };
enum class SumZeta { exp_tu, one };
enum class OracleField { solver, solver_nystrom, zero };

struct JobSpec {
  std::string command;
  std::string kernel;
  CouplingParams couplings;
  std::optional<OddRational> tau;
  TauConstantVariant variant = TauConstantVariant::Corrected;
  PottsMode potts_mode = PottsMode::reduced;
  SumZeta zeta = SumZeta::exp_tu;
  int nodes = 64;
  SolverConfig solver;
  int starts = 20;
  int samples = 100;
  int resolution = 201;
  int separability_grid = 17;
  double separability_tol = 1e-10;
  int depth = 2;
  int grid = 7;
  OracleField field = OracleField::solver;
  std::vector<OddRational> sweep_tau;
  std::string output;
  OutputFormat format = OutputFormat::json;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> c = {"solve",         "solve-period2",      "verify-analytic", "scan-positivity",
                                             "check-separability", "oracle-check", "sweep"};
  return c;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline ConfigError invalid(const std::string& key, const std::string& msg) {
  return ConfigError(ConfigError::Kind::validation_error, msg, 0, key);
}

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) throw invalid(key, "expected a finite number, got '" + v + "'");
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw invalid(key, "expected an integer, got '" + v + "'");
  return x;
}

inline int parse_int_in(const std::string& key, const std::string& v, long long lo, long long hi) {
  const long long x = parse_int(key, v);
  if (x < lo || x > hi)
    throw invalid(key, "value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

inline OddRational parse_tau(const std::string& key, const std::string& v) {
  try {
    return OddRational::parse(v);
  } catch (const std::invalid_argument& e) {
    throw invalid(key, e.what());
  }
}

template <class E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (v == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw invalid(key, "'" + v + "' is not one of " + names);
}

inline std::string to_string(SumZeta z) { return z == SumZeta::exp_tu ? "exp_tu" : "one"; }
inline std::string to_string(OracleField f) {
  switch (f) {
    case OracleField::solver: return "solver";
    case OracleField::solver_nystrom: return "solver_nystrom";
    case OracleField::zero: return "zero";
  }
  return "unknown";
}
inline std::string to_string(PottsMode m) { return m == PottsMode::reduced ? "reduced" : "naive_diagonal"; }

}  // namespace detail

/// Parses a flat key = value document. Blank lines and text after '#' are
/// ignored. Every key is validated; unknown or repeated keys are errors.
inline JobSpec parse_config(const std::string& text) {
  using detail::invalid;
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigError::Kind::parse_error, "expected 'key = value'", line_no);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(ConfigError::Kind::parse_error, "empty key", line_no);
    if (value.empty()) throw ConfigError(ConfigError::Kind::parse_error, "empty value", line_no, key);
    if (kv.count(key)) throw ConfigError(ConfigError::Kind::parse_error, "duplicate key", line_no, key);
    kv[key] = {value, line_no};
  }

  JobSpec job;
  for (const auto& [key, entry] : kv) {
    const std::string& v = entry.first;
    if (key == "command") {
      if (std::find(known_commands().begin(), known_commands().end(), v) == known_commands().end())
        throw invalid(key, "unknown command '" + v + "'");
      job.command = v;
    } else if (key == "kernel") {
      if (v != "ising" && v != "potts" && v != "tau" && v != "sum")
        throw invalid(key, "'" + v + "' is not one of ising, potts, tau, sum");
      job.kernel = v;
    } else if (key == "J3") {
      job.couplings.J3 = detail::parse_double(key, v);
    } else if (key == "J") {
      job.couplings.J = detail::parse_double(key, v);
    } else if (key == "J1") {
      job.couplings.J1 = detail::parse_double(key, v);
    } else if (key == "alpha") {
      job.couplings.alpha = detail::parse_double(key, v);
    } else if (key == "beta") {
      job.couplings.beta = detail::parse_double(key, v);
      if (!(job.couplings.beta > 0.0)) throw invalid(key, "must be positive");
    } else if (key == "tau") {
      job.tau = detail::parse_tau(key, v);
    } else if (key == "variant") {
      job.variant = detail::parse_enum<TauConstantVariant>(
          key, v, {{"printed", TauConstantVariant::Printed}, {"corrected", TauConstantVariant::Corrected}});
    } else if (key == "potts_mode") {
      job.potts_mode = detail::parse_enum<PottsMode>(
          key, v, {{"reduced", PottsMode::reduced}, {"naive_diagonal", PottsMode::naive_diagonal}});
    } else if (key == "zeta") {
      job.zeta = detail::parse_enum<SumZeta>(key, v, {{"exp_tu", SumZeta::exp_tu}, {"one", SumZeta::one}});
    } else if (key == "nodes") {
      job.nodes = detail::parse_int_in(key, v, 1, 512);
    } else if (key == "tol") {
      job.solver.tol = detail::parse_double(key, v);
      if (!(job.solver.tol > 0.0)) throw invalid(key, "must be positive");
    } else if (key == "max_iter") {
      job.solver.max_iter = detail::parse_int_in(key, v, 1, 100000000);
    } else if (key == "damping") {
      job.solver.damping = detail::parse_double(key, v);
      if (!(job.solver.damping > 0.0 && job.solver.damping <= 1.0)) throw invalid(key, "must lie in (0, 1]");
    } else if (key == "dedup_tol") {
      job.solver.dedup_tol = detail::parse_double(key, v);
      if (!(job.solver.dedup_tol > 0.0)) throw invalid(key, "must be positive");
    } else if (key == "seed") {
      const long long s = detail::parse_int(key, v);
      if (s < 0) throw invalid(key, "must be non-negative");
      job.solver.seed = static_cast<std::uint64_t>(s);
    } else if (key == "newton_fallback") {
      job.solver.newton_fallback = detail::parse_enum<bool>(key, v, {{"true", true}, {"false", false}});
    } else if (key == "starts") {
      job.starts = detail::parse_int_in(key, v, 1, 100000);
    } else if (key == "samples") {
      job.samples = detail::parse_int_in(key, v, 1, 1000000);
    } else if (key == "resolution") {
      job.resolution = detail::parse_int_in(key, v, 2, 2001);
    } else if (key == "separability_grid") {
      job.separability_grid = detail::parse_int_in(key, v, 3, 201);
    } else if (key == "separability_tol") {
      job.separability_tol = detail::parse_double(key, v);
      if (!(job.separability_tol > 0.0)) throw invalid(key, "must be positive");
    } else if (key == "depth") {
      job.depth = detail::parse_int_in(key, v, 2, 3);
    } else if (key == "grid") {
      job.grid = detail::parse_int_in(key, v, 2, 64);
    } else if (key == "field") {
      job.field = detail::parse_enum<OracleField>(
          key, v, {{"solver", OracleField::solver}, {"solver_nystrom", OracleField::solver_nystrom}, {"zero", OracleField::zero}});
    } else if (key == "sweep_tau") {
      job.sweep_tau.clear();
      std::istringstream items(v);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) throw invalid(key, "empty list entry");
        job.sweep_tau.push_back(detail::parse_tau(key, item));
      }
    } else if (key == "output") {
      job.output = v;
    } else if (key == "format") {
      job.format = detail::parse_enum<OutputFormat>(key, v, {{"json", OutputFormat::json}, {"csv", OutputFormat::csv}});
    } else {
      throw ConfigError(ConfigError::Kind::validation_error, "unknown key", entry.second, key);
    }
  }

  if (job.command.empty()) throw invalid("command", "missing required key");
  if (job.kernel.empty()) throw invalid("kernel", "missing required key");
  if (job.kernel == "tau") {
    if (!job.tau && job.command != "sweep") throw invalid("tau", "required for kernel = tau");
    if (job.nodes % 2 != 0) throw invalid("nodes", "the tau family needs an even node count");
  }
  if (job.command == "sweep") {
    if (job.kernel != "tau") throw invalid("kernel", "sweep runs over tau kernels");
    if (job.sweep_tau.empty()) throw invalid("sweep_tau", "required for command = sweep");
  } else if (!job.sweep_tau.empty()) {
    throw invalid("sweep_tau", "only valid for command = sweep");
  }
  if (job.command == "oracle-check" && job.kernel != "ising")
    throw invalid("kernel", "oracle-check evaluates the ising interactions");
  if (job.format == OutputFormat::csv && job.command != "sweep") throw invalid("format", "csv is reserved for sweeps");
  if (!kv.count("format") && job.command == "sweep") job.format = OutputFormat::csv;
  if (job.output.empty()) job.output = job.command + (job.format == OutputFormat::csv ? ".csv" : ".json");
  return job;
}

/// Canonical key = value text; parse_config(emit_config(j)) reproduces j.
inline std::string emit_config(const JobSpec& j) {
  using detail::fmt_double;
  std::vector<std::pair<std::string, std::string>> kv = {
      {"command", j.command}, {"kernel", j.kernel},
      {"J3", fmt_double(j.couplings.J3)}, {"J", fmt_double(j.couplings.J)},
      {"J1", fmt_double(j.couplings.J1)}, {"alpha", fmt_double(j.couplings.alpha)},
      {"beta", fmt_double(j.couplings.beta)}};
  if (j.tau) kv.emplace_back("tau", j.tau->str());
  kv.insert(kv.end(), {{"variant", to_string(j.variant)},
                       {"potts_mode", detail::to_string(j.potts_mode)},
                       {"zeta", detail::to_string(j.zeta)},
                       {"nodes", std::to_string(j.nodes)},
                       {"tol", fmt_double(j.solver.tol)},
                       {"max_iter", std::to_string(j.solver.max_iter)},
                       {"damping", fmt_double(j.solver.damping)},
                       {"dedup_tol", fmt_double(j.solver.dedup_tol)},
                       {"seed", std::to_string(j.solver.seed)},
                       {"newton_fallback", j.solver.newton_fallback ? "true" : "false"},
                       {"starts", std::to_string(j.starts)},
                       {"samples", std::to_string(j.samples)},
                       {"resolution", std::to_string(j.resolution)},
                       {"separability_grid", std::to_string(j.separability_grid)},
                       {"separability_tol", fmt_double(j.separability_tol)},
                       {"depth", std::to_string(j.depth)},
                       {"grid", std::to_string(j.grid)},
                       {"field", detail::to_string(j.field)}});
  if (!j.sweep_tau.empty()) {
    std::string s;
    for (const auto& t : j.sweep_tau) s += (s.empty() ? "" : ",") + t.str();
    kv.emplace_back("sweep_tau", s);
  }
  kv.emplace_back("output", j.output);
  kv.emplace_back("format", j.format == OutputFormat::csv ? "csv" : "json");
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

inline json echo_config(const JobSpec& j) {
  json c = json::object();
  std::istringstream in(emit_config(j));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return c;
}

inline Kernel build_kernel(const JobSpec& j) {
  if (j.kernel == "ising") return make_ising_kernel(j.couplings);
  if (j.kernel == "potts") return make_potts_kernel(j.couplings, j.potts_mode);
  if (j.kernel == "tau") return make_tau_kernel(*j.tau, j.variant);
  if (j.zeta == SumZeta::one) return make_sum_kernel([](double, double) { return 1.0; });
  return make_sum_kernel([](double t, double u) { return std::exp(t * u); });
}

struct JobOutcome {
  ExitCode exit_code = ExitCode::success;
  json report;
  std::optional<std::string> csv;
};

namespace detail {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json vec(const std::vector<double>& v) { return json(v); }

inline json fixed_point_json(const FixedPoint& p) {
  return {{"residual", p.residual},
          {"iterations", p.iterations},
          {"method", to_string(p.method)},
          {"nodes", vec(p.f.rule->nodes)},
          {"values", vec(p.f.values)}};
}

inline JobOutcome run_solve(const JobSpec& j) {
  const Kernel k = build_kernel(j);
  const DiscreteOperator op(k, default_rule_for(k, j.nodes));
  const auto pts = multistart_search(op, j.solver, j.starts);
  JobOutcome out;
  json r;
  r["kernel"] = k.describe();
  r["rule"] = to_string(op.rule()->kind);
  r["starts"] = j.starts;
  r["count"] = pts.size();
  json list = json::array();
  for (const auto& p : pts) {
    json e = fixed_point_json(p);
    e["value_at_zero"] = op.A_at(p.f, 0.0);
    e["distance_to_one"] = sup_distance(p.f, GridFunction::constant(op.rule(), 1.0));
    if (k.tau()) e["distance_to_f2"] = sup_distance(p.f, analytic_f2(*k.tau(), op.rule()));
    list.push_back(std::move(e));
  }
  r["fixed_points"] = std::move(list);
  json dist = json::array();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      dist.push_back({{"i", a}, {"j", b}, {"sup_distance", sup_distance(pts[a].f, pts[b].f)}});
  r["pairwise_distances"] = std::move(dist);
  out.report["result"] = std::move(r);
  if (pts.empty()) {
    out.exit_code = ExitCode::not_converged;
    out.report["error"] = {{"kind", "not_converged"}, {"message", "no start converged to a positive fixed point"}};
  }
  return out;
}

inline JobOutcome run_period_two(const JobSpec& j) {
  const Kernel k = build_kernel(j);
  const DiscreteOperator op(k, default_rule_for(k, j.nodes));
  std::mt19937_64 rng(j.solver.seed);
  std::uniform_real_distribution<double> eps(-1.0, 1.0);
  const auto draw = [&] {
    std::vector<double> v(op.size());
    for (auto& x : v) x = std::exp(eps(rng));
    return GridFunction(op.rule(), std::move(v));
  };
  JobOutcome out;
  json runs = json::array();
  int converged = 0, ti = 0, p2 = 0;
  for (int s = 0; s < j.starts; ++s) {
    const auto f0 = draw();
    const auto g0 = draw();
    const auto r = solve_period_two(op, j.solver, f0, g0);
    json e{{"start", s},
           {"status", to_string(r.status)},
           {"iterations", r.pair.iterations},
           {"residual_f", r.pair.residuals.first},
           {"residual_g", r.pair.residuals.second},
           {"sup_distance", sup_distance(r.pair.f, r.pair.g)}};
    if (r.ok()) {
      ++converged;
      e["classification"] = to_string(r.pair.classification);
      (r.pair.classification == Classification::translation_invariant ? ti : p2)++;
    }
    runs.push_back(std::move(e));
  }
  out.report["result"] = {{"kernel", k.describe()},
                          {"starts", j.starts},
                          {"converged", converged},
                          {"translation_invariant", ti},
                          {"period_two", p2},
                          {"runs", std::move(runs)}};
  if (converged < j.starts) {
    out.exit_code = ExitCode::not_converged;
    out.report["error"] = {{"kind", "not_converged"},
                           {"message", std::to_string(j.starts - converged) + " starts did not converge"}};
  }
  return out;
}

inline json verification_json(const VerificationReport& v) {
  return {{"candidate", v.candidate_id},
          {"kernel", v.kernel_id},
          {"status", to_string(v.status)},
          {"residual_sup", v.residual_sup},
          {"residual_profile", vec(v.residual_profile)}};
}

inline JobOutcome run_verify(const JobSpec& j) {
  const Kernel k = build_kernel(j);
  const auto rule = default_rule_for(k, j.nodes);
  const DiscreteOperator op(k, rule);
  JobOutcome out;
  json r;
  r["kernel"] = k.describe();
  r["nodes"] = j.nodes;
  json checks = json::array();
  checks.push_back(verification_json(verify_fixed_point(op, analytic_f1(rule), "f1")));
  if (k.tau()) {
    const auto m = moment_integrals(*k.tau(), j.nodes);
    r["moments"] = {{"I1", m.I1}, {"I2", m.I2}, {"I1_quadrature", m.I1_quadrature}, {"I2_quadrature", m.I2_quadrature}};
    checks.push_back(verification_json(verify_fixed_point(op, analytic_f2(*k.tau(), rule), "f2")));
  }
  r["verifications"] = std::move(checks);
  const auto d = check_degenerate_operator(op, j.samples, j.solver.seed);
  r["degeneracy"] = {{"degenerate", d.degenerate}, {"max_deviation", d.max_deviation}, {"samples", d.samples}};
  out.report["result"] = std::move(r);
  return out;
}

inline json scan_json(const ScanReport& s) {
  return {{"min_value", s.min_value},
          {"argmin", {s.argmin[0], s.argmin[1], s.argmin[2]}},
          {"grid_resolution", s.grid_resolution},
          {"positive", s.positive}};
}

inline JobOutcome run_scan(const JobSpec& j) {
  const Kernel k = build_kernel(j);
  JobOutcome out;
  json r = scan_json(positivity_scan(k, j.resolution));
  r["kernel"] = k.describe();
  out.report["result"] = std::move(r);
  return out;
}

inline JobOutcome run_separability(const JobSpec& j) {
  const Kernel k = build_kernel(j);
  const auto s = separability_test(k, j.separability_grid, j.separability_tol);
  JobOutcome out;
  json r{{"kernel", k.describe()},
         {"separable", s.separable},
         {"max_mixed_defect", s.max_mixed_defect},
         {"tolerance", s.tolerance},
         {"grid", s.grid}};
  if (s.failure_reason) r["failure_reason"] = to_string(*s.failure_reason);
  out.report["result"] = std::move(r);
  return out;
}

inline JobOutcome run_oracle(const JobSpec& j) {
  const auto tree = build_tree(j.depth);
  const Kernel k = build_kernel(j);
  JobOutcome out;
  BoundaryField field;
  try {
    if (j.field == OracleField::zero)
      field = BoundaryField::zero(tree, trapezoid_rule(j.grid)->nodes);
    else
      field = solver_boundary_field(tree, k, j.grid, j.solver,
                                    j.field == OracleField::solver ? FieldSource::oracle_grid : FieldSource::nystrom,
                                    j.nodes);
  } catch (const std::runtime_error& e) {
    out.exit_code = ExitCode::not_converged;
    out.report["error"] = {{"kind", "not_converged"}, {"message", e.what()}};
    out.report["result"] = json::object();
    return out;
  }
  const auto c = compatibility_residual(tree, j.couplings, ising_interactions(), field, j.grid);
  out.report["result"] = {{"depth", c.depth},
                          {"grid", c.grid},
                          {"residual", c.residual},
                          {"samples", c.samples},
                          {"field", to_string(j.field)},
                          {"partition_n", c.partition_n},
                          {"partition_n_minus_1", c.partition_n_minus_1},
                          {"root_parents_excluded", c.root_parents_excluded}};
  return out;
}

inline JobOutcome run_sweep(const JobSpec& j) {
  std::vector<ScanReport> scans(j.sweep_tau.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < j.sweep_tau.size(); ++i)
    pool.emplace_back([&, i] { scans[i] = positivity_scan(make_tau_kernel(j.sweep_tau[i], j.variant), j.resolution); });
  for (auto& t : pool) t.join();
  JobOutcome out;
  json rows = json::array();
  std::ostringstream csv;
  csv << "tau,tau_value,min_value,argmin_t,argmin_u,argmin_v,positive\n";
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const auto& s = scans[i];
    json row = scan_json(s);
    row["tau"] = j.sweep_tau[i].str();
    rows.push_back(std::move(row));
    csv << j.sweep_tau[i].str() << ',' << fmt_double(j.sweep_tau[i].value()) << ',' << fmt_double(s.min_value) << ','
        << fmt_double(s.argmin[0]) << ',' << fmt_double(s.argmin[1]) << ',' << fmt_double(s.argmin[2]) << ','
        << (s.positive ? "true" : "false") << '\n';
  }
  out.report["result"] = {{"variant", to_string(j.variant)}, {"resolution", j.resolution}, {"rows", std::move(rows)}};
  if (j.format == OutputFormat::csv) out.csv = csv.str();
  return out;
}

}  // namespace detail

/// Runs the job. The report carries tool_version, seed, the echoed config
/// and a timestamp; failures are recorded under "error".
inline JobOutcome execute(const JobSpec& j) {
  JobOutcome out;
  try {
    if (j.command == "solve") out = detail::run_solve(j);
    else if (j.command == "solve-period2") out = detail::run_period_two(j);
    else if (j.command == "verify-analytic") out = detail::run_verify(j);
    else if (j.command == "scan-positivity") out = detail::run_scan(j);
    else if (j.command == "check-separability") out = detail::run_separability(j);
    else if (j.command == "oracle-check") out = detail::run_oracle(j);
    else if (j.command == "sweep") out = detail::run_sweep(j);
    else throw detail::invalid("command", "unknown command '" + j.command + "'");
  } catch (const ConfigError& e) {
    out = {};
    out.exit_code = ExitCode::config_error;
    out.report["error"] = e.to_json();
  } catch (const std::invalid_argument& e) {
    out = {};
    out.exit_code = ExitCode::config_error;
    out.report["error"] = {{"kind", "validation_error"}, {"message", e.what()}};
  }
  json report;
  report["schema"] = kReportSchema;
  report["tool_version"] = kToolVersion;
  report["command"] = j.command;
  report["seed"] = j.solver.seed;
  report["config"] = echo_config(j);
  report["timestamp"] = detail::utc_timestamp();
  report["exit_code"] = static_cast<int>(out.exit_code);
  if (out.report.contains("result")) report["result"] = std::move(out.report["result"]);
  if (out.report.contains("error")) report["error"] = std::move(out.report["error"]);
  out.report = std::move(report);
  return out;
}

/// Report for a job file that could not be parsed.
inline json config_error_report(const ConfigError& e) {
  json report;
  report["schema"] = kReportSchema;
  report["tool_version"] = kToolVersion;
  report["timestamp"] = detail::utc_timestamp();
  report["exit_code"] = static_cast<int>(ExitCode::config_error);
  report["error"] = e.to_json();
  return report;
}

/// The report with the timestamp removed, serialized.
inline std::string payload_without_timestamp(json report) {
  report.erase("timestamp");
  return report.dump(2);
}

/// Output path after applying CAYLEY_OUTPUT_DIR, which replaces the directory part.
inline std::filesystem::path resolve_output(const std::string& output) {
  std::filesystem::path p(output);
  if (const char* dir = std::getenv("CAYLEY_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p.filename();
  return p;
}

/// Writes the JSON report, plus the CSV table for sweeps (the CSV goes to the
/// configured path and the JSON next to it with a .json extension).
inline std::vector<std::filesystem::path> write_outputs(const JobOutcome& out, const std::filesystem::path& path) {
  std::vector<std::filesystem::path> written;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto put = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
    written.push_back(p);
  };
  if (out.csv) {
    std::string header = "# tool_version=" + std::string(kToolVersion) +
                         " seed=" + out.report["seed"].dump() + "\n";
    for (const auto& [k, v] : out.report["config"].items()) header += "# " + k + " = " + v.get<std::string>() + "\n";
    put(path, header + *out.csv);
    auto json_path = path;
    json_path.replace_extension(".json");
    if (json_path != path) put(json_path, out.report.dump(2) + "\n");
  } else {
    put(path, out.report.dump(2) + "\n");
  }
  return written;
}

}  // namespace cayley

#endif  // CAYLEY_JOB_HPP
