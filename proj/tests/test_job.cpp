#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cayley/job.hpp"

using namespace cayley;

namespace {

ConfigError expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError(ConfigError::Kind::parse_error, "none");
}

}  // namespace

TEST(ParseConfig, DirectFieldMapping) {
  const auto j = parse_config("command = solve\nkernel = tau\ntau = 1/1\nvariant = corrected\nnodes = 64");
  EXPECT_EQ(j.command, "solve");
  EXPECT_EQ(j.kernel, "tau");
  ASSERT_TRUE(j.tau.has_value());
  EXPECT_EQ(*j.tau, OddRational(1, 1));
  EXPECT_EQ(j.variant, TauConstantVariant::Corrected);
  EXPECT_EQ(j.nodes, 64);
  EXPECT_EQ(j.output, "solve.json");
}

TEST(ParseConfig, CommentsAndWhitespace) {
  const auto j = parse_config("# header\n\n  command=scan-positivity   # trailing\nkernel = ising\n\tJ1 = -0.5\n");
  EXPECT_EQ(j.command, "scan-positivity");
  EXPECT_EQ(j.couplings.J1, -0.5);
}

TEST(ParseConfig, EvenTauRejected) {
  const auto e = expect_config_error("command = solve\nkernel = tau\ntau = 2/1\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::validation_error);
  EXPECT_EQ(e.key(), "tau");
  EXPECT_EQ(expect_config_error("command = solve\nkernel = tau\ntau = 1/4\n").key(), "tau");
}

TEST(ParseConfig, MissingCommand) {
  const auto e = expect_config_error("kernel = ising\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::validation_error);
  EXPECT_EQ(e.key(), "command");
}

TEST(ParseConfig, SyntaxErrorsCarryLineNumbers) {
  auto e = expect_config_error("command = solve\nkernel ising\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::parse_error);
  EXPECT_EQ(e.line(), 2);
  e = expect_config_error("command = solve\nkernel = ising\ncommand = sweep\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::parse_error);
  EXPECT_EQ(e.line(), 3);
}

TEST(ParseConfig, UnknownAndInvalidKeys) {
  auto e = expect_config_error("command = solve\nkernel = ising\ncolour = blue\n");
  EXPECT_EQ(e.key(), "colour");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(expect_config_error("command = solve\nkernel = ising\nbeta = 0\n").key(), "beta");
  EXPECT_EQ(expect_config_error("command = solve\nkernel = ising\nnodes = 12x\n").key(), "nodes");
  EXPECT_EQ(expect_config_error("command = solve\nkernel = ising\ndamping = 1.5\n").key(), "damping");
  EXPECT_EQ(expect_config_error("command = fly\nkernel = ising\n").key(), "command");
  EXPECT_EQ(expect_config_error("command = solve\nkernel = tau\n").key(), "tau");
  EXPECT_EQ(expect_config_error("command = solve\nkernel = tau\ntau = 1/3\nnodes = 63\n").key(), "nodes");
  EXPECT_EQ(expect_config_error("command = sweep\nkernel = tau\n").key(), "sweep_tau");
  EXPECT_EQ(expect_config_error("command = solve\nkernel = ising\nformat = csv\n").key(), "format");
  EXPECT_EQ(expect_config_error("command = oracle-check\nkernel = tau\ntau = 1\n").key(), "kernel");
}

TEST(EmitConfig, RoundTrip) {
  const auto j = parse_config(
      "command = sweep\nkernel = tau\nvariant = printed\nsweep_tau = 1,3/1,5/3\nresolution = 21\nJ1 = 0.1\n"
      "tol = 1e-11\nseed = 12\n");
  const auto text = emit_config(j);
  const auto k = parse_config(text);
  EXPECT_EQ(emit_config(k), text);
  EXPECT_EQ(k.sweep_tau.size(), 3u);
  EXPECT_EQ(k.couplings.J1, 0.1);
  EXPECT_EQ(k.solver.tol, 1e-11);
  EXPECT_EQ(k.format, OutputFormat::csv);
}

TEST(Execute, SolveIsingGivesConstantOne) {
  const auto j = parse_config("command = solve\nkernel = ising\nJ = 1.1\nalpha = 0.3\nstarts = 4\nnodes = 16\n");
  const auto out = execute(j);
  EXPECT_EQ(out.exit_code, ExitCode::success);
  const auto& r = out.report["result"];
  ASSERT_EQ(r["count"], 1);
  for (const auto& v : r["fixed_points"][0]["values"]) EXPECT_NEAR(v.get<double>(), 1.0, 1e-12);
  EXPECT_EQ(out.report["tool_version"], kToolVersion);
  EXPECT_EQ(out.report["seed"], 0);
  EXPECT_EQ(out.report["config"]["kernel"], "ising");
  EXPECT_TRUE(out.report.contains("timestamp"));
}

TEST(Execute, ScanFindsNegativityAndSucceeds) {
  const auto j = parse_config("command = scan-positivity\nkernel = tau\ntau = 1\nvariant = corrected\nresolution = 21\n");
  const auto out = execute(j);
  EXPECT_EQ(out.exit_code, ExitCode::success);
  EXPECT_LT(out.report["result"]["min_value"].get<double>(), 0.0);
  EXPECT_FALSE(out.report["result"]["positive"].get<bool>());
}

TEST(Execute, SweepCrossesBetweenFiveAndSeven) {
  const auto j = parse_config("command = sweep\nkernel = tau\nvariant = printed\nsweep_tau = 1,3,5,7,9\nresolution = 51\n");
  const auto out = execute(j);
  EXPECT_EQ(out.exit_code, ExitCode::success);
  ASSERT_TRUE(out.csv.has_value());
  const auto& rows = out.report["result"]["rows"];
  ASSERT_EQ(rows.size(), 5u);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(rows[i]["positive"].get<bool>());
  for (int i = 3; i < 5; ++i) EXPECT_TRUE(rows[i]["positive"].get<bool>());
  EXPECT_EQ(out.csv->substr(0, out.csv->find('\n')), "tau,tau_value,min_value,argmin_t,argmin_u,argmin_v,positive");
}

TEST(Execute, NonConvergenceExitsOne) {
  const auto j = parse_config("command = solve\nkernel = ising\nJ1 = 2\nmax_iter = 1\ntol = 1e-15\nstarts = 2\n"
                              "newton_fallback = false\nnodes = 8\n");
  const auto out = execute(j);
  EXPECT_EQ(out.exit_code, ExitCode::not_converged);
  EXPECT_EQ(out.report["error"]["kind"], "not_converged");
  EXPECT_EQ(out.report["exit_code"], 1);
}

TEST(Execute, SeparabilityAndVerify) {
  auto out = execute(parse_config("command = check-separability\nkernel = ising\nJ1 = 0.4\nseparability_grid = 9\n"));
  EXPECT_TRUE(out.report["result"]["separable"].get<bool>());
  out = execute(parse_config("command = check-separability\nkernel = ising\nJ3 = 0.4\nseparability_grid = 9\n"));
  EXPECT_FALSE(out.report["result"]["separable"].get<bool>());
  EXPECT_EQ(out.report["result"]["failure_reason"], "defect_exceeds_tol");

  out = execute(parse_config("command = verify-analytic\nkernel = tau\ntau = 1\nvariant = printed\nsamples = 3\n"));
  EXPECT_EQ(out.exit_code, ExitCode::success);
  const auto& checks = out.report["result"]["verifications"];
  ASSERT_EQ(checks.size(), 2u);
  EXPECT_LT(checks[0]["residual_sup"].get<double>(), 1e-10);
  EXPECT_GT(checks[1]["residual_sup"].get<double>(), 1.8);
  EXPECT_FALSE(out.report["result"]["degeneracy"]["degenerate"].get<bool>());
}

TEST(Execute, OracleCheckReportsFields) {
  const auto out = execute(parse_config("command = oracle-check\nkernel = ising\nJ1 = 0.5\ngrid = 4\n"));
  EXPECT_EQ(out.exit_code, ExitCode::success);
  const auto& r = out.report["result"];
  EXPECT_EQ(r["depth"], 2);
  EXPECT_EQ(r["grid"], 4);
  EXPECT_EQ(r["samples"], 256);
  EXPECT_LT(r["residual"].get<double>(), 1e-8);
  EXPECT_TRUE(r["root_parents_excluded"].get<bool>());
}

TEST(Execute, DeterministicPayload) {
  const auto j = parse_config("command = solve-period2\nkernel = sum\nnodes = 12\nstarts = 3\nseed = 5\n");
  EXPECT_EQ(payload_without_timestamp(execute(j).report), payload_without_timestamp(execute(j).report));
  // round trip through the emitted text gives the same payload
  EXPECT_EQ(payload_without_timestamp(execute(parse_config(emit_config(j))).report),
            payload_without_timestamp(execute(j).report));
}

TEST(Outputs, WritesJsonAndCsvWithEnvOverride) {
  const auto dir = std::filesystem::temp_directory_path() / "cayley_job_test";
  std::filesystem::remove_all(dir);
  ::setenv("CAYLEY_OUTPUT_DIR", dir.c_str(), 1);
  const auto j = parse_config("command = sweep\nkernel = tau\nsweep_tau = 1,7\nresolution = 11\noutput = elsewhere/s.csv\n");
  const auto path = resolve_output(j.output);
  EXPECT_EQ(path, dir / "s.csv");
  const auto written = write_outputs(execute(j), path);
  ::unsetenv("CAYLEY_OUTPUT_DIR");
  ASSERT_EQ(written.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "s.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "s.json"));
  std::ifstream in(dir / "s.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("# tool_version=", 0), 0u);
  std::filesystem::remove_all(dir);
  EXPECT_EQ(resolve_output("a/b.json"), std::filesystem::path("a/b.json"));
}
