#include "levysel/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "levysel/ensemble.hpp"

namespace levysel {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) {
      return "nan";
    }
    if (std::isinf(*d)) {
      return *d > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, ptr);
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) {
    return std::to_string(*i);
  }
  if (const auto* b = std::get_if<bool>(&c)) {
    return *b ? "true" : "false";
  }
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    return std::isfinite(*d) ? json(*d) : json(format_cell(c));
  }
  return std::visit([](const auto& v) { return json(v); }, c);
}

void write_table(const Table& t, ReportFormat format, std::ostream& os) {
  if (format == ReportFormat::csv) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      os << (i ? "," : "") << t.columns[i];
    }
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        os << (i ? "," : "") << format_cell(row[i]);
      }
      os << '\n';
    }
    return;
  }
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      obj[t.columns[i]] = cell_json(row[i]);
    }
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

std::int64_t as_int(std::size_t n) { return static_cast<std::int64_t>(n); }

json scales_json(const ScaleTriple& s) {
  return {{"eps", s.eps}, {"eps_prime", s.eps_prime}, {"eps_second", s.eps_second}};
}

json estimate_json(const SelectionEstimate& e) {
  return {{"eps", e.eps_used},
          {"n_total", e.n_total},
          {"n_plus", e.n_plus},
          {"n_minus", e.n_minus},
          {"n_undecided", e.n_undecided},
          {"p_plus_hat", e.p_plus_hat},
          {"p_minus_hat", e.p_minus_hat},
          {"ci_lower", e.ci.lower},
          {"ci_upper", e.ci.upper},
          {"ci_half_width", e.ci_half_width},
          {"undecided_fraction", e.undecided_fraction()},
          {"valid", e.valid},
          {"scales", scales_json(e.scales)}};
}

const std::vector<std::string> kEstimateColumns{
    "eps",       "eps_prime",     "eps_second",         "n_total",
    "n_plus",    "n_minus",       "n_undecided",        "p_plus_hat",
    "p_minus_hat", "ci_lower",    "ci_upper",           "ci_half_width",
    "undecided_fraction", "valid"};

std::vector<Cell> estimate_cells(const SelectionEstimate& e) {
  return {e.eps_used,          e.scales.eps_prime,   e.scales.eps_second,
          as_int(e.n_total),   as_int(e.n_plus),     as_int(e.n_minus),
          as_int(e.n_undecided), e.p_plus_hat,       e.p_minus_hat,
          e.ci.lower,          e.ci.upper,           e.ci_half_width,
          e.undecided_fraction(), e.valid};
}

/// Result of one experiment before it is written to disk.
struct Outcome {
  Table report;
  json results = json::object();
  /// Non-empty when an estimate was invalid; the run then exits with 4.
  std::string invalid;
  /// Paths to dump as CSV, keyed by file stem.
  std::vector<std::pair<std::string, PathSample>> paths;
};

RunOptions run_options(const ExperimentConfig& cfg) {
  RunOptions opts;
  opts.seed = cfg.seed;
  opts.workers = cfg.workers;
  return opts;
}

void note_invalid(Outcome& o, const SelectionEstimate& e) {
  if (!e.valid && o.invalid.empty()) {
    std::ostringstream msg;
    msg << "estimate at eps=" << e.eps_used << " is invalid: undecided fraction "
        << e.undecided_fraction() << " exceeds " << kMaxUndecidedFraction;
    o.invalid = msg.str();
  }
}

std::string path_stem(std::size_t i) {
  std::ostringstream os;
  os << "path_" << std::setw(6) << std::setfill('0') << i;
  return os.str();
}

Outcome run_simulate(const ExperimentConfig& cfg) {
  std::optional<ScaleTriple> scales;
  const PathSimulator sim = [&] {
    if (cfg.rescaled_frame) {
      scales = solve_scales(cfg.eps, cfg.spec.drift, cfg.spec.noise, cfg.scales_tol);
      return PathSimulator::rescaled(cfg.spec.drift, cfg.spec.diffusion, cfg.spec.noise,
                                     *scales, cfg.sim);
    }
    return PathSimulator::macroscopic(cfg.spec.drift, cfg.spec.diffusion, cfg.spec.noise,
                                      cfg.eps, cfg.sim);
  }();

  const std::size_t keep = std::min(cfg.dump_paths, cfg.n_paths);
  std::vector<PathSample> kept(keep);
  struct Summary {
    std::optional<ExitRecord> exit;
    double final_time = 0.0;
    double final_value = 0.0;
  };
  const auto rows = run_ensemble<Summary>(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    RandomStream rng(cfg.seed, derive_stream_id(0, i));
    PathSample p = sim.run(cfg.x0, rng);
    Summary s{p.exit, p.times.back(), p.values.back()};
    if (i < keep) {
      kept[i] = std::move(p);
    }
    return s;
  });

  Outcome o;
  o.report.columns = {"path", "exit_side", "exit_time", "exit_value", "final_time",
                      "final_value"};
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;
  const double nan = std::nan("");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Summary& s = rows[i];
    if (s.exit) {
      (s.exit->side == Side::plus ? n_plus : n_minus) += 1;
    }
    o.report.rows.push_back({as_int(i), std::string(s.exit ? to_string(s.exit->side) : "none"),
                             s.exit ? s.exit->time : nan, s.exit ? s.exit->value : nan,
                             s.final_time, s.final_value});
  }
  o.results = {{"frame", cfg.rescaled_frame ? "rescaled" : "macroscopic"},
               {"n_paths", cfg.n_paths},
               {"n_exit_plus", n_plus},
               {"n_exit_minus", n_minus},
               {"n_no_exit", cfg.n_paths - n_plus - n_minus}};
  if (scales) {
    o.results["scales"] = scales_json(*scales);
  }
  for (std::size_t i = 0; i < keep; ++i) {
    o.paths.emplace_back(path_stem(i), std::move(kept[i]));
  }
  return o;
}

Outcome run_estimate(const ExperimentConfig& cfg) {
  const SelectionEstimate e =
      estimate_selection(cfg.spec, cfg.eps, cfg.n_paths, cfg.sim, run_options(cfg));
  Outcome o;
  o.report.columns = kEstimateColumns;
  o.report.rows.push_back(estimate_cells(e));
  o.results = estimate_json(e);
  note_invalid(o, e);

  // Paths are deterministic in (seed, stream), so the first few can be
  // regenerated for inspection.
  const std::size_t keep = std::min(cfg.dump_paths, cfg.n_paths);
  if (keep > 0) {
    const PathSimulator sim = PathSimulator::rescaled(cfg.spec.drift, cfg.spec.diffusion,
                                                      cfg.spec.noise, e.scales, cfg.sim);
    for (std::size_t i = 0; i < keep; ++i) {
      RandomStream rng(cfg.seed, derive_stream_id(0, i));
      o.paths.emplace_back(path_stem(i), sim.run(0.0, rng));
    }
  }
  return o;
}

Outcome run_robustness(const ExperimentConfig& cfg) {
  const RobustnessReport r = robustness_experiment(model_limit(cfg.spec), cfg.spec,
                                                   cfg.eps_grid, cfg.n_paths, cfg.sim,
                                                   run_options(cfg));
  Outcome o;
  o.report.columns = {"eps",         "p_plus_model",       "ci_half_width_model",
                      "p_plus_generalized", "ci_half_width_generalized", "difference",
                      "combined_half_width", "undecided_model", "undecided_generalized"};
  json rows = json::array();
  for (const RobustnessRow& row : r.rows) {
    o.report.rows.push_back({row.eps, row.model.p_plus_hat, row.model.ci_half_width,
                             row.generalized.p_plus_hat, row.generalized.ci_half_width,
                             row.difference(), row.combined_half_width(),
                             row.model.undecided_fraction(),
                             row.generalized.undecided_fraction()});
    rows.push_back({{"eps", row.eps},
                    {"model", estimate_json(row.model)},
                    {"generalized", estimate_json(row.generalized)},
                    {"difference", row.difference()},
                    {"combined_half_width", row.combined_half_width()}});
    note_invalid(o, row.model);
    note_invalid(o, row.generalized);
  }
  o.results = {{"rows", rows}, {"verdict", r.verdict}, {"monotone_shrink", r.monotone_shrink}};
  return o;
}

Outcome run_invariance(const ExperimentConfig& cfg) {
  const InvarianceReport r =
      eps_invariance_check(cfg.spec, cfg.eps_grid, cfg.n_paths, cfg.sim, run_options(cfg));
  Outcome o;
  o.report.columns = kEstimateColumns;
  json rows = json::array();
  for (const SelectionEstimate& e : r.estimates) {
    o.report.rows.push_back(estimate_cells(e));
    rows.push_back(estimate_json(e));
    note_invalid(o, e);
  }
  o.results = {{"estimates", rows}, {"worst_margin", r.worst_margin}, {"pass", r.pass}};
  return o;
}

Outcome run_tube(const ExperimentConfig& cfg) {
  const auto rows = tube_convergence(cfg.spec, cfg.eps_grid, cfg.tube, cfg.n_paths,
                                     run_options(cfg));
  Outcome o;
  o.report.columns = {"eps",          "delta",          "n_paths",
                      "n_plus_tube",  "n_minus_tube",   "inside_fraction",
                      "inside_ci_lower", "inside_ci_upper", "plus_share",
                      "plus_share_ci_lower", "plus_share_ci_upper", "exit_p_plus_hat",
                      "exit_ci_half_width"};
  json out = json::array();
  for (const TubeRow& r : rows) {
    const ProportionInterval share = r.plus_share_ci();
    o.report.rows.push_back({r.eps, r.delta, as_int(r.n_paths), as_int(r.n_plus_tube),
                             as_int(r.n_minus_tube), r.inside_fraction(), r.inside_ci.lower,
                             r.inside_ci.upper, r.plus_share(), share.lower, share.upper,
                             r.exit_estimate.p_plus_hat, r.exit_estimate.ci_half_width});
    out.push_back({{"eps", r.eps},
                   {"delta", r.delta},
                   {"inside_fraction", r.inside_fraction()},
                   {"plus_share", r.plus_share()},
                   {"exit", estimate_json(r.exit_estimate)}});
  }
  o.results = {{"rows", out}, {"nondecreasing", tube_fraction_nondecreasing(rows)}};
  return o;
}

Outcome run_scales(const ExperimentConfig& cfg) {
  Outcome o;
  o.report.columns = {"eps",          "eps_prime",      "eps_second",        "drift_residual",
                      "noise_residual", "eps_second_over_eps", "status"};
  const double alpha = noise_alpha(cfg.spec.noise);
  const SlowlyVaryingSpec l_nu = noise_slow_var(cfg.spec.noise);
  std::size_t failures = 0;
  for (const double eps : cfg.eps_grid) {
    try {
      const ScaleTriple s = solve_scales(eps, cfg.spec.drift, cfg.spec.noise, cfg.scales_tol);
      const ScaleResiduals r =
          scale_residuals(s, alpha, cfg.spec.drift.beta, cfg.spec.drift.slow_var_l, l_nu);
      o.report.rows.push_back({eps, s.eps_prime, s.eps_second, r.drift_balance,
                               r.noise_balance, s.eps_second / eps, std::string("ok")});
    } catch (const ScaleSolverError&) {
      ++failures;
      const double nan = std::nan("");
      o.report.rows.push_back({eps, nan, nan, nan, nan, nan, std::string("no_convergence")});
    }
  }
  o.results = {{"n_eps", cfg.eps_grid.size()}, {"n_failed", failures}};
  return o;
}

Outcome run_tails(const ExperimentConfig& cfg) {
  std::vector<ScaleTriple> scales;
  for (const double eps : cfg.eps_grid) {
    scales.push_back(solve_scales(eps, cfg.spec.drift, cfg.spec.noise, cfg.scales_tol));
  }
  std::optional<TailBound> bound;
  if (cfg.bound_constant > 0.0) {
    bound = TailBound{cfg.bound_constant, cfg.bound_delta};
  }
  const auto rows = tail_convergence_report(cfg.spec.noise, cfg.z_grid, scales, bound);
  Outcome o;
  o.report.columns = {"eps", "z", "side", "nu_eps", "nu_alpha", "abs_err"};
  std::size_t violations = 0;
  double max_err = 0.0;
  for (const TailReportRow& r : rows) {
    o.report.rows.push_back(
        {r.eps, r.z, std::string(to_string(r.side)), r.nu_eps, r.nu_alpha, r.abs_err});
    violations += r.bound_violation ? 1 : 0;
    max_err = std::max(max_err, r.abs_err);
  }
  o.results = {{"n_rows", rows.size()},
               {"max_abs_err", max_err},
               {"bound_checked", bound.has_value()},
               {"bound_violations", violations}};
  return o;
}

Outcome run_oracle(const ExperimentConfig& cfg) {
  SelectionModel spec = cfg.spec;
  spec.noise = BrownianSpec{};
  const SidePair ref =
      gaussian_reference(spec.drift.beta, spec.drift.a_plus, spec.drift.a_minus);
  const SelectionEstimate e =
      estimate_selection(spec, cfg.eps, cfg.n_paths, cfg.sim, run_options(cfg));
  const bool inside = e.ci.lower <= ref.p_plus && ref.p_plus <= e.ci.upper;
  Outcome o;
  o.report.columns = {"beta", "a_plus", "a_minus", "p_plus_reference"};
  o.report.columns.insert(o.report.columns.end(), kEstimateColumns.begin(),
                          kEstimateColumns.end());
  o.report.columns.push_back("reference_in_ci");
  std::vector<Cell> row{spec.drift.beta, spec.drift.a_plus, spec.drift.a_minus, ref.p_plus};
  for (Cell& c : estimate_cells(e)) {
    row.push_back(std::move(c));
  }
  row.emplace_back(inside);
  o.report.rows.push_back(std::move(row));
  o.results = {{"p_plus_reference", ref.p_plus},
               {"estimate", estimate_json(e)},
               {"reference_in_ci", inside}};
  note_invalid(o, e);
  return o;
}

Outcome run_exit_box(const ExperimentConfig& cfg) {
  const auto rows = exit_box_experiment(cfg.spec, cfg.eps_grid, cfg.box_r, cfg.box_t0,
                                        cfg.n_paths, cfg.sim, run_options(cfg));
  Outcome o;
  o.report.columns = {"eps", "n_paths", "n_exited", "exit_fraction", "ci_lower", "ci_upper"};
  double worst = 1.0;
  for (const ExitBoxRow& r : rows) {
    o.report.rows.push_back({r.eps, as_int(r.n_paths), as_int(r.n_exited), r.exit_fraction(),
                             r.ci.lower, r.ci.upper});
    worst = std::min(worst, r.exit_fraction());
  }
  o.results = {{"box_r", cfg.box_r}, {"t0", cfg.box_t0}, {"min_exit_fraction", worst}};
  return o;
}

Outcome dispatch(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::simulate:
      return run_simulate(cfg);
    case ExperimentKind::estimate:
      return run_estimate(cfg);
    case ExperimentKind::robustness:
      return run_robustness(cfg);
    case ExperimentKind::eps_invariance:
      return run_invariance(cfg);
    case ExperimentKind::tube:
      return run_tube(cfg);
    case ExperimentKind::scales:
      return run_scales(cfg);
    case ExperimentKind::tails:
      return run_tails(cfg);
    case ExperimentKind::gaussian_oracle:
      return run_oracle(cfg);
    case ExperimentKind::exit_box:
      return run_exit_box(cfg);
  }
  throw std::logic_error("unhandled experiment kind");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  os << content;
}

}  // namespace

std::optional<ExperimentKind> command_kind(const std::string& command) {
  if (command == "run") {
    return std::nullopt;
  }
  if (command == "oracle") {
    return ExperimentKind::gaussian_oracle;
  }
  return parse_experiment_kind(command);
}

ConfigEntries assemble_entries(const CliRequest& request,
                               std::vector<std::string>* applied_overrides) {
  ConfigEntries entries;
  if (request.config_path) {
    entries = read_config_file(*request.config_path);
  }
  std::vector<std::string> overrides;
  std::optional<ExperimentKind> kind;
  try {
    kind = command_kind(request.command);
  } catch (const std::invalid_argument&) {
    throw ConfigParseError("unknown command '" + request.command + "'");
  }
  if (kind) {
    overrides.push_back(std::string("experiment.kind=") + to_string(*kind));
  }
  overrides.insert(overrides.end(), request.overrides.begin(), request.overrides.end());
  if (request.seed) {
    overrides.push_back("experiment.seed=" + std::to_string(*request.seed));
  }
  if (request.workers) {
    overrides.push_back("experiment.workers=" + std::to_string(*request.workers));
  }
  if (request.out_dir) {
    overrides.push_back("output.dir=" + *request.out_dir);
  }
  if (request.dump_paths) {
    overrides.push_back("output.dump_paths=" + std::to_string(*request.dump_paths));
  }
  if (request.format) {
    overrides.push_back("output.format=" + *request.format);
  }
  apply_overrides(entries, overrides);
  if (applied_overrides) {
    *applied_overrides = overrides;
  }
  return entries;
}

fs::path resolve_out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) {
    return cfg.out_dir;
  }
  if (const char* env = std::getenv("LEVYSEL_OUT_DIR"); env && *env) {
    return env;
  }
  return "levysel_out";
}

RunOutcome run_cli(const CliRequest& request, std::ostream& out, std::ostream& err) {
  RunOutcome result;
  try {
    std::vector<std::string> overrides;
    const ConfigEntries entries = assemble_entries(request, &overrides);
    const ExperimentConfig cfg = build_config(entries);
    result.out_dir = resolve_out_dir(cfg);

    const auto start = std::chrono::steady_clock::now();
    Outcome o = dispatch(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(result.out_dir);
    const std::string ext = cfg.format == ReportFormat::csv ? "csv" : "json";
    const std::string report_name = "report." + ext;
    std::ostringstream report;
    write_table(o.report, cfg.format, report);
    write_file(result.out_dir / report_name, report.str());

    if (!o.paths.empty()) {
      fs::create_directories(result.out_dir / "paths");
      for (const auto& [stem, path] : o.paths) {
        std::ostringstream os;
        write_path_csv(os, path);
        write_file(result.out_dir / "paths" / (stem + ".csv"), os.str());
      }
    }

    json summary = {{"schema_version", kSchemaVersion},
                    {"experiment", to_string(cfg.kind)},
                    {"name", cfg.name},
                    {"seed", cfg.seed},
                    {"n_paths", cfg.n_paths},
                    {"status", o.invalid.empty() ? "ok" : "invalid_estimate"},
                    {"report", report_name},
                    {"results", o.results}};
    write_file(result.out_dir / "summary.json", summary.dump(2) + "\n");

    json resolved = json::object();
    for (const auto& [k, v] : resolved_entries(cfg)) {
      resolved[k] = v;
    }
    json provenance = {{"schema_version", kSchemaVersion},
                       {"tool", "levysel"},
                       {"version", LEVYSEL_VERSION},
                       {"command", request.command},
                       {"config_file", request.config_path ? json(*request.config_path)
                                                           : json(nullptr)},
                       {"overrides", overrides},
                       {"seed", cfg.seed},
                       {"workers", cfg.workers},
                       {"resolved_config", resolved}};
    write_file(result.out_dir / "provenance.json", provenance.dump(2) + "\n");

    out << to_string(cfg.kind) << ": wrote " << (result.out_dir / report_name).string()
        << " in " << std::fixed << std::setprecision(2) << seconds << " s\n";
    if (!o.invalid.empty()) {
      err << "error: " << o.invalid << '\n';
      result.exit_code = kExitInvalidEstimate;
    }
  } catch (const ConfigParseError& e) {
    err << "config error: " << e.what() << '\n';
    result.exit_code = kExitParseError;
  } catch (const ConfigValidationError& e) {
    err << "invalid value for " << e.field() << ": " << e.what() << '\n';
    result.exit_code = kExitValidationError;
  } catch (const InvalidEstimateError& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = kExitInvalidEstimate;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    result.exit_code = kExitValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = kExitFailure;
  }
  return result;
}

}  // namespace levysel
