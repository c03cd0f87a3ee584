#include "levysel/selection_mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "levysel/ensemble.hpp"
#include "levysel/scaling.hpp"

namespace levysel {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) {
    throw std::invalid_argument(std::string(what) + ": eps grid is empty");
  }
  for (const double e : grid) {
    if (!(e > 0.0 && e <= 1.0)) {
      throw std::invalid_argument(std::string(what) + ": eps values must lie in (0, 1]");
    }
  }
}

}  // namespace

const char* to_string(Selection s) {
  switch (s) {
    case Selection::plus:
      return "plus";
    case Selection::minus:
      return "minus";
    case Selection::undecided:
      break;
  }
  return "undecided";
}

Selection classify_path(const PathSample& path, double level) {
  const auto exit = first_exit(path, level);
  if (!exit) {
    return Selection::undecided;
  }
  return exit->side == Side::plus ? Selection::plus : Selection::minus;
}

void SelectionModel::validate() const {
  drift.validate();
  diffusion.validate();
  levysel::validate(noise);
}

SelectionModel SelectionModel::mirrored() const {
  return {drift.mirrored(), diffusion.mirrored(), levysel::mirrored(noise)};
}

SelectionModel model_limit(const SelectionModel& spec) {
  SelectionModel out;
  out.drift = spec.drift.model_limit();
  out.diffusion = DiffusionSpec::constant_value(spec.diffusion.b_zero());
  if (const auto* g = std::get_if<GeneralizedNoiseSpec>(&spec.noise)) {
    out.noise = g->tails;
  } else {
    out.noise = spec.noise;
  }
  return out;
}

double SelectionEstimate::undecided_fraction() const noexcept {
  return n_total == 0 ? 0.0
                      : static_cast<double>(n_undecided) / static_cast<double>(n_total);
}

void SelectionEstimate::merge(const SelectionEstimate& other) {
  n_total += other.n_total;
  n_plus += other.n_plus;
  n_minus += other.n_minus;
  n_undecided += other.n_undecided;
  runtime_seconds += other.runtime_seconds;
  finalize();
}

void SelectionEstimate::finalize() {
  const std::size_t decided = n_plus + n_minus;
  if (decided > 0) {
    p_plus_hat = static_cast<double>(n_plus) / static_cast<double>(decided);
    p_minus_hat = 1.0 - p_plus_hat;
  } else {
    p_plus_hat = 0.5;
    p_minus_hat = 0.5;
  }
  ci = wilson_interval(static_cast<double>(n_plus), static_cast<double>(decided));
  ci_half_width = ci.half_width();
  valid = decided > 0 && undecided_fraction() < kMaxUndecidedFraction;
}

SelectionEstimate estimate_selection(const SelectionModel& spec, double eps,
                                     std::size_t n_paths, const SimConfig& cfg,
                                     const RunOptions& opts) {
  if (n_paths < 100) {
    throw std::invalid_argument("estimate_selection: n_paths must be >= 100");
  }
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("estimate_selection: eps must lie in (0, 1]");
  }
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const ScaleTriple scales = solve_scales(eps, spec.drift, spec.noise);
  const PathSimulator sim =
      PathSimulator::rescaled(spec.drift, spec.diffusion, spec.noise, scales, cfg);

  const auto outcomes = run_ensemble<Selection>(n_paths, opts.workers, [&](std::size_t i) {
    RandomStream rng(opts.seed, derive_stream_id(opts.experiment_index, i));
    const PathSample path = sim.run(0.0, rng);
    if (!path.exit) {
      return Selection::undecided;
    }
    return path.exit->side == Side::plus ? Selection::plus : Selection::minus;
  });

  SelectionEstimate est;
  est.n_total = n_paths;
  for (const Selection s : outcomes) {
    switch (s) {
      case Selection::plus:
        ++est.n_plus;
        break;
      case Selection::minus:
        ++est.n_minus;
        break;
      case Selection::undecided:
        ++est.n_undecided;
        break;
    }
  }
  est.eps_used = eps;
  est.scales = scales;
  est.finalize();
  est.runtime_seconds = seconds_since(start);
  return est;
}

SidePair gaussian_reference(double beta, double a_plus, double a_minus) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("gaussian_reference: beta must lie in (0, 1)");
  }
  if (!(a_plus > 0.0 && a_minus > 0.0)) {
    throw std::invalid_argument("gaussian_reference: A+ and A- must be positive");
  }
  const double k = -1.0 / (1.0 + beta);
  const double wp = std::pow(a_plus, k);
  const double wm = std::pow(a_minus, k);
  const double p_minus = wp / (wm + wp);
  return {p_minus, 1.0 - p_minus};
}

bool agree_within_ci(const SelectionEstimate& a, const SelectionEstimate& b) {
  return std::abs(a.p_plus_hat - b.p_plus_hat) < a.ci_half_width + b.ci_half_width;
}

void TubeConfig::validate() const {
  if (!(horizon > 0.0 && std::isfinite(horizon))) {
    throw std::invalid_argument("tube.horizon must be positive");
  }
  if (!(dt > 0.0 && dt < horizon)) {
    throw std::invalid_argument("tube.dt must lie in (0, tube.horizon)");
  }
  if (!(delta_fraction > 0.0)) {
    throw std::invalid_argument("tube.delta_fraction must be positive");
  }
  if (!(exit_level > 0.0)) {
    throw std::invalid_argument("tube.exit_level must be positive");
  }
}

double TubeRow::inside_fraction() const noexcept {
  return n_paths == 0 ? 0.0
                      : static_cast<double>(n_plus_tube + n_minus_tube) /
                            static_cast<double>(n_paths);
}

double TubeRow::plus_share() const noexcept {
  const std::size_t inside = n_plus_tube + n_minus_tube;
  return inside == 0 ? 0.5
                     : static_cast<double>(n_plus_tube) / static_cast<double>(inside);
}

ProportionInterval TubeRow::plus_share_ci() const {
  return wilson_interval(static_cast<double>(n_plus_tube),
                         static_cast<double>(n_plus_tube + n_minus_tube));
}

double sup_distance_to_extremal(const PathSample& path, const DriftSpec& drift, Side side) {
  double d = 0.0;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    d = std::max(d, std::abs(path.values[i] - extremal_solution(drift, path.times[i], side)));
  }
  return d;
}

std::vector<TubeRow> tube_convergence(const SelectionModel& spec,
                                      std::span<const double> eps_grid,
                                      const TubeConfig& tube, std::size_t n_paths,
                                      const RunOptions& opts) {
  require_grid(eps_grid, "tube_convergence");
  tube.validate();
  spec.validate();
  if (n_paths == 0) {
    throw std::invalid_argument("tube_convergence: n_paths must be positive");
  }

  SimConfig cfg;
  cfg.dt = tube.dt;
  cfg.horizon = tube.horizon;
  cfg.exit_level = std::numeric_limits<double>::infinity();
  cfg.record_stride = 1;
  const std::uint64_t n_steps = cfg.steps();
  cfg.max_steps = std::max<std::uint64_t>(cfg.max_steps, n_steps);

  std::vector<double> x_plus(n_steps + 1);
  std::vector<double> x_minus(n_steps + 1);
  for (std::uint64_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    x_plus[k] = extremal_solution(spec.drift, t, Side::plus);
    x_minus[k] = extremal_solution(spec.drift, t, Side::minus);
  }
  const double delta = tube.delta_fraction * x_plus.back();

  struct Outcome {
    int tube = 0;  // +1, -1 or 0
    Selection exit = Selection::undecided;
  };

  std::vector<TubeRow> rows;
  rows.reserve(eps_grid.size());
  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = eps_grid[g];
    const ScaleTriple scales = solve_scales(eps, spec.drift, spec.noise);
    const double level = tube.exit_level * scales.eps_second;
    const PathSimulator sim =
        PathSimulator::macroscopic(spec.drift, spec.diffusion, spec.noise, eps, cfg);
    const std::uint64_t experiment = opts.experiment_index + g;

    const auto outcomes = run_ensemble<Outcome>(n_paths, opts.workers, [&](std::size_t i) {
      RandomStream rng(opts.seed, derive_stream_id(experiment, i));
      const PathSample path = sim.run(0.0, rng);
      double d_plus = 0.0;
      double d_minus = 0.0;
      for (std::size_t k = 0; k < path.values.size(); ++k) {
        d_plus = std::max(d_plus, std::abs(path.values[k] - x_plus[k]));
        d_minus = std::max(d_minus, std::abs(path.values[k] - x_minus[k]));
      }
      Outcome out;
      if (std::min(d_plus, d_minus) < delta) {
        out.tube = d_plus <= d_minus ? 1 : -1;
      }
      out.exit = classify_path(path, level);
      return out;
    });

    TubeRow row;
    row.eps = eps;
    row.delta = delta;
    row.n_paths = n_paths;
    SelectionEstimate& est = row.exit_estimate;
    est.n_total = n_paths;
    est.eps_used = eps;
    est.scales = scales;
    for (const Outcome& o : outcomes) {
      row.n_plus_tube += o.tube == 1;
      row.n_minus_tube += o.tube == -1;
      est.n_plus += o.exit == Selection::plus;
      est.n_minus += o.exit == Selection::minus;
      est.n_undecided += o.exit == Selection::undecided;
    }
    est.finalize();
    row.inside_ci = wilson_interval(static_cast<double>(row.n_plus_tube + row.n_minus_tube),
                                    static_cast<double>(n_paths));
    est.runtime_seconds = seconds_since(start);
    rows.push_back(row);
  }
  return rows;
}

bool tube_fraction_nondecreasing(std::span<const TubeRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].inside_ci.upper < rows[i - 1].inside_ci.lower) {
      return false;
    }
  }
  return true;
}

double RobustnessRow::difference() const noexcept {
  return generalized.p_plus_hat - model.p_plus_hat;
}

double RobustnessRow::combined_half_width() const noexcept {
  return generalized.ci_half_width + model.ci_half_width;
}

RobustnessReport robustness_experiment(const SelectionModel& model,
                                       const SelectionModel& generalized,
                                       std::span<const double> eps_grid,
                                       std::size_t n_paths, const SimConfig& cfg,
                                       const RunOptions& opts) {
  require_grid(eps_grid, "robustness_experiment");
  model.validate();
  generalized.validate();
  const SelectionModel lim_model = model_limit(model);
  const SelectionModel lim_gen = model_limit(generalized);
  const auto& dm = lim_model.drift;
  const auto& dg = lim_gen.drift;
  if (noise_alpha(lim_model.noise) != noise_alpha(lim_gen.noise) || dm.beta != dg.beta ||
      dm.a_plus != dg.a_plus || dm.a_minus != dg.a_minus) {
    throw std::invalid_argument(
        "robustness_experiment: specs differ in (alpha, beta, A+, A-)");
  }
  const auto* sm = std::get_if<StableTailSpec>(&lim_model.noise);
  const auto* sg = std::get_if<StableTailSpec>(&lim_gen.noise);
  if ((sm == nullptr) != (sg == nullptr) ||
      (sm && sm->c_plus * sg->c_minus != sm->c_minus * sg->c_plus)) {
    throw std::invalid_argument("robustness_experiment: specs differ in C+/C-");
  }

  RobustnessReport report;
  std::vector<double> grid(eps_grid.begin(), eps_grid.end());
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    RobustnessRow row;
    row.eps = grid[g];
    RunOptions o = opts;
    o.experiment_index = opts.experiment_index + 2 * g;
    row.model = estimate_selection(model, row.eps, n_paths, cfg, o);
    o.experiment_index += 1;
    row.generalized = estimate_selection(generalized, row.eps, n_paths, cfg, o);
    report.rows.push_back(row);
  }
  const RobustnessRow& last = report.rows.back();
  report.verdict = std::abs(last.difference()) < last.combined_half_width();
  report.monotone_shrink = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& prev = report.rows[i - 1];
    const auto& cur = report.rows[i];
    if (std::abs(cur.difference()) > std::abs(prev.difference()) + cur.combined_half_width()) {
      report.monotone_shrink = false;
    }
  }
  return report;
}

InvarianceReport eps_invariance_check(const SelectionModel& spec,
                                      std::span<const double> eps_list,
                                      std::size_t n_paths, const SimConfig& cfg,
                                      const RunOptions& opts) {
  require_grid(eps_list, "eps_invariance_check");
  const auto [lo, hi] = std::minmax_element(eps_list.begin(), eps_list.end());
  if (eps_list.size() < 3 || std::log10(*hi / *lo) < 2.0 - 1e-9) {
    throw std::invalid_argument(
        "eps_invariance_check: need at least 3 eps values spanning 2 decades");
  }
  InvarianceReport report;
  for (std::size_t g = 0; g < eps_list.size(); ++g) {
    RunOptions o = opts;
    o.experiment_index = opts.experiment_index + g;
    report.estimates.push_back(estimate_selection(spec, eps_list[g], n_paths, cfg, o));
  }
  report.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.estimates.size(); ++i) {
    for (std::size_t j = i + 1; j < report.estimates.size(); ++j) {
      const auto& a = report.estimates[i];
      const auto& b = report.estimates[j];
      report.worst_margin =
          std::max(report.worst_margin, std::abs(a.p_plus_hat - b.p_plus_hat) -
                                            (a.ci_half_width + b.ci_half_width));
    }
  }
  report.pass = report.worst_margin < 0.0;
  return report;
}

double ExitBoxRow::exit_fraction() const noexcept {
  return n_paths == 0 ? 0.0
                      : static_cast<double>(n_exited) / static_cast<double>(n_paths);
}

std::vector<ExitBoxRow> exit_box_experiment(const SelectionModel& spec,
                                            std::span<const double> eps_grid,
                                            double box_r, double horizon_t0,
                                            std::size_t n_paths, const SimConfig& cfg,
                                            const RunOptions& opts) {
  require_grid(eps_grid, "exit_box_experiment");
  if (!(box_r > 0.0 && horizon_t0 > 0.0)) {
    throw std::invalid_argument("exit_box_experiment: R and T0 must be positive");
  }
  SimConfig box_cfg = cfg;
  box_cfg.exit_level = box_r;
  box_cfg.horizon = horizon_t0;
  std::vector<ExitBoxRow> rows;
  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    RunOptions o = opts;
    o.experiment_index = opts.experiment_index + g;
    const SelectionEstimate est = estimate_selection(spec, eps_grid[g], n_paths, box_cfg, o);
    ExitBoxRow row;
    row.eps = eps_grid[g];
    row.n_paths = est.n_total;
    row.n_exited = est.n_plus + est.n_minus;
    row.ci = wilson_interval(static_cast<double>(row.n_exited),
                             static_cast<double>(row.n_paths));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace levysel
