// cayley run <job file> [--output path]
// cayley emit <job file>

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cayley/job.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cayley::ConfigError(cayley::ConfigError::Kind::parse_error, "cannot read job file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& config_path, const std::string& output_override, bool quiet) {
  cayley::JobSpec job;
  try {
    job = cayley::parse_config(slurp(config_path));
  } catch (const cayley::ConfigError& e) {
    const auto report = cayley::config_error_report(e);
    if (!output_override.empty()) {
      cayley::JobOutcome out;
      out.exit_code = cayley::ExitCode::config_error;
      out.report = report;
      cayley::write_outputs(out, cayley::resolve_output(output_override));
    }
    std::cerr << e.what() << "\n";
    return static_cast<int>(cayley::ExitCode::config_error);
  }
  if (!output_override.empty()) job.output = output_override;
  const auto out = cayley::execute(job);
  const auto paths = cayley::write_outputs(out, cayley::resolve_output(job.output));
  if (!quiet) {
    for (const auto& p : paths) std::cout << p.string() << "\n";
  }
  if (out.report.contains("error")) std::cerr << out.report["error"].dump() << "\n";
  return static_cast<int>(out.exit_code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed points of the boundary-law operator on the Cayley tree"};
  app.set_version_flag("--version", std::string(cayley::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "execute a job file and write its report");
  run_cmd->add_option("config", config_path, "job file (key = value lines)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", output, "report path (overrides the job's output key)");
  run_cmd->add_flag("-q,--quiet", quiet, "do not print written paths");

  std::string emit_path;
  auto* emit_cmd = app.add_subcommand("emit", "print the canonical form of a job file");
  emit_cmd->add_option("config", emit_path, "job file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(cayley::ExitCode::config_error);
  }

  try {
    if (*run_cmd) return run(config_path, output, quiet);
    try {
      std::cout << cayley::emit_config(cayley::parse_config(slurp(emit_path)));
      return 0;
    } catch (const cayley::ConfigError& e) {
      std::cerr << e.what() << "\n";
      return static_cast<int>(cayley::ExitCode::config_error);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
