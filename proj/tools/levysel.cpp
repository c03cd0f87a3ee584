#include <iostream>

#include <CLI11.hpp>

#include "levysel/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo selection experiments for Levy-driven SDEs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LEVYSEL_VERSION);

  levysel::CliRequest request;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out_dir;
  std::size_t dump_paths = 0;
  std::string format;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"run", "Run the experiment named by experiment.kind"},
      {"simulate", "Simulate paths and write per-path exit summaries"},
      {"estimate", "Estimate the selection probabilities"},
      {"robustness", "Compare a generalized equation with its model limit"},
      {"eps-invariance", "Check that p+ does not depend on eps"},
      {"tube", "Measure concentration around the extremal solutions"},
      {"scales", "Solve the time-space scales along experiment.eps_grid"},
      {"tails", "Report convergence of the rescaled jump tails"},
      {"oracle", "Brownian run against the closed-form selection law"},
      {"exit-box", "Share of rescaled paths leaving [-R, R] by T0"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", request.overrides, "Override, section.key=value")
        ->allow_extra_args(false);
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("-j,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("-o,--out-dir", out_dir, "Output directory");
    sub->add_option("--dump-paths", dump_paths, "Write the first N paths as CSV");
    sub->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&request, name = name] { request.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : levysel::kExitParseError;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (!config.empty()) {
    request.config_path = config;
  }
  if (sub->count("--seed")) {
    request.seed = seed;
  }
  if (sub->count("--workers")) {
    request.workers = workers;
  }
  if (!out_dir.empty()) {
    request.out_dir = out_dir;
  }
  if (sub->count("--dump-paths")) {
    request.dump_paths = dump_paths;
  }
  if (!format.empty()) {
    request.format = format;
  }
  return levysel::run_cli(request, std::cout, std::cerr).exit_code;
}
