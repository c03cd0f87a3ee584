#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "levysel/config.hpp"

namespace levysel {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitParseError = 2,
  kExitValidationError = 3,
  kExitInvalidEstimate = 4,
};

/// One invocation of the command-line tool after argument parsing.
struct CliRequest {
  /// simulate, estimate, robustness, scales, tails, oracle, exit-box or run.
  std::string command = "run";
  std::optional<std::string> config_path;
  /// "section.key=value", applied after the config file.
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> dump_paths;
  std::optional<std::string> format;
};

/// Experiment kind selected by a subcommand; nullopt for "run".
std::optional<ExperimentKind> command_kind(const std::string& command);

/// Merges file, subcommand and flag settings into the flat entry map, in
/// that order of precedence (later wins). Also returns the overrides in the
/// order they were applied.
ConfigEntries assemble_entries(const CliRequest& request,
                               std::vector<std::string>* applied_overrides = nullptr);

/// Output directory: output.dir, else $LEVYSEL_OUT_DIR, else ./levysel_out.
std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg);

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path out_dir;
};

/// Runs the experiment and writes summary.json, provenance.json and the
/// report into the output directory. Errors are reported on `err` and
/// mapped to exit codes; nothing is thrown.
RunOutcome run_cli(const CliRequest& request, std::ostream& out, std::ostream& err);

}  // namespace levysel
