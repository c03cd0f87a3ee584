#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levysel/scaling.hpp"
#include "levysel/selection_mc.hpp"

namespace levysel {

enum class ExperimentKind {
  simulate,
  estimate,
  robustness,
  eps_invariance,
  tube,
  scales,
  tails,
  gaussian_oracle,
  exit_box,
};

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Malformed input: syntax, unknown keys, non-numeric values.
class ConfigParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a spec invariant. `field` is the dotted
/// path of the offending key, e.g. "drift.beta".
class ConfigValidationError : public std::runtime_error {
public:
  ConfigValidationError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

enum class ReportFormat { csv, json };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::estimate;
  std::string name = "experiment";
  double eps = 0.01;
  std::vector<double> eps_grid{1e-1, 1e-2, 1e-3};
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  /// The (possibly generalized) spec under study; robustness runs compare it
  /// with model_limit(spec).
  SelectionModel spec;
  SimConfig sim;
  double x0 = 0.0;
  /// simulate only: integrate in rescaled variables instead of X^eps.
  bool rescaled_frame = true;

  TubeConfig tube;

  std::vector<double> z_grid{0.5, 1.0, 2.0, 4.0};
  double bound_constant = 0.0;  // 0 disables the envelope check
  double bound_delta = 0.1;

  double scales_tol = 1e-10;

  double box_r = 10.0;
  double box_t0 = 50.0;

  std::string out_dir;
  ReportFormat format = ReportFormat::csv;
  std::size_t dump_paths = 0;

  /// Checks every field; throws ConfigValidationError naming the field.
  void validate() const;
};

/// Flat key/value view of a config file: "section.key" -> raw text.
using ConfigEntries = std::map<std::string, std::string>;

/// Reads an INI file. Throws ConfigParseError on syntax errors.
ConfigEntries read_config_file(const std::string& path);
ConfigEntries read_config_string(const std::string& text);

/// Applies "section.key=value" overrides in order.
void apply_overrides(ConfigEntries& entries, const std::vector<std::string>& overrides);

/// Builds and validates a configuration. Unknown keys and malformed values
/// raise ConfigParseError; invariant violations raise ConfigValidationError.
ExperimentConfig build_config(const ConfigEntries& entries);

/// Fully resolved configuration as "section.key" -> canonical text; the
/// inverse of build_config.
ConfigEntries resolved_entries(const ExperimentConfig& cfg);

std::vector<double> parse_double_list(const std::string& text, const std::string& field);

}  // namespace levysel
