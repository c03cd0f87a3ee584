#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "levysel/drift_field.hpp"
#include "levysel/levy_noise.hpp"
#include "levysel/sde_engine.hpp"
#include "levysel/stats.hpp"

namespace levysel {

enum class Selection { plus, minus, undecided };

const char* to_string(Selection s);

/// Side of the first exit beyond +-level; undecided when the path never
/// leaves [-level, level].
Selection classify_path(const PathSample& path, double level);

/// Drift, diffusion coefficient and driving noise of one SDE.
struct SelectionModel {
  DriftSpec drift;
  DiffusionSpec diffusion;
  NoiseSpec noise = StableTailSpec{};

  void validate() const;
  /// Swaps the half-lines: A+ <-> A-, C+ <-> C-, b(x) -> b(-x).
  SelectionModel mirrored() const;
};

/// Model equation with the same limit parameters: stable noise with the
/// limit tail constants, piecewise power drift with the same (beta, A+, A-),
/// and constant diffusion b(0). Brownian noise stays Brownian.
SelectionModel model_limit(const SelectionModel& spec);

/// Parallel execution settings shared by all Monte Carlo drivers.
struct RunOptions {
  std::uint64_t seed = 1;
  /// Selects the block of random streams; distinct experiments use
  /// distinct indices so that their paths are independent.
  std::uint64_t experiment_index = 0;
  std::size_t workers = 1;
};

struct SelectionEstimate {
  std::size_t n_total = 0;
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;
  std::size_t n_undecided = 0;
  double p_plus_hat = 0.5;
  double p_minus_hat = 0.5;
  /// Wilson 95% interval for p_plus over the decided paths.
  ProportionInterval ci;
  double ci_half_width = 0.5;
  double eps_used = 0.0;
  ScaleTriple scales;
  double runtime_seconds = 0.0;
  /// Undecided fraction below `kMaxUndecidedFraction`.
  bool valid = false;

  double undecided_fraction() const noexcept;
  /// Absorbs the counts of another estimate over the same setting.
  void merge(const SelectionEstimate& other);
  /// Recomputes p-hats, interval and validity from the counts.
  void finalize();
};

inline constexpr double kMaxUndecidedFraction = 0.05;

/// Raised by callers that require a valid estimate.
class InvalidEstimateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Runs n_paths simulations from the origin and classifies their first exit.
///
/// `cfg` is given in the rescaled frame Y(t) = X(eps' t) / eps'' of
/// solve_scales: dt and horizon are multiples of eps' and exit_level is the
/// box half-width H in units of eps''. Path i uses stream
/// derive_stream_id(opts.experiment_index, i).
SelectionEstimate estimate_selection(const SelectionModel& spec, double eps,
                                     std::size_t n_paths, const SimConfig& cfg,
                                     const RunOptions& opts);

/// Closed-form selection probabilities for Brownian noise:
/// p_minus = A+^{-1/(1+beta)} / (A-^{-1/(1+beta)} + A+^{-1/(1+beta)}).
struct SidePair {
  double p_minus = 0.5;
  double p_plus = 0.5;
};
SidePair gaussian_reference(double beta, double a_plus, double a_minus);

/// True when the two estimates differ by less than the sum of their CI
/// half-widths.
bool agree_within_ci(const SelectionEstimate& a, const SelectionEstimate& b);

struct TubeConfig {
  /// Macroscopic horizon T and Euler step.
  double horizon = 10.0;
  double dt = 1e-2;
  /// Tube radius delta = delta_fraction * x+(T).
  double delta_fraction = 0.1;
  /// First-exit level, in units of eps'', used to classify the same paths.
  double exit_level = 10.0;

  void validate() const;
};

struct TubeRow {
  double eps = 0.0;
  double delta = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_plus_tube = 0;
  std::size_t n_minus_tube = 0;
  ProportionInterval inside_ci;
  /// First-exit classification of the same ensemble.
  SelectionEstimate exit_estimate;

  double inside_fraction() const noexcept;
  /// Share of the x+ tube among paths inside either tube.
  double plus_share() const noexcept;
  ProportionInterval plus_share_ci() const;
};

/// sup_t |path(t) - x(t)| against the extremal solution of the given side.
double sup_distance_to_extremal(const PathSample& path, const DriftSpec& drift, Side side);

/// Fraction of macroscopic paths X^eps on [0, T] within sup-distance delta of
/// x+ or x-, for every eps in the grid (grid order preserved).
std::vector<TubeRow> tube_convergence(const SelectionModel& spec,
                                      std::span<const double> eps_grid,
                                      const TubeConfig& tube, std::size_t n_paths,
                                      const RunOptions& opts);

/// Fraction nondecreasing along the grid up to overlap of Wilson intervals.
bool tube_fraction_nondecreasing(std::span<const TubeRow> rows);

struct RobustnessRow {
  double eps = 0.0;
  SelectionEstimate model;
  SelectionEstimate generalized;

  double difference() const noexcept;
  double combined_half_width() const noexcept;
};

struct RobustnessReport {
  std::vector<RobustnessRow> rows;
  /// |difference| below the combined half-width at the smallest eps.
  bool verdict = false;
  /// Each |difference| exceeds the previous (larger-eps) one by at most its
  /// own combined half-width.
  bool monotone_shrink = false;
};

/// Compares the selection estimates of a generalized spec and the model spec
/// along eps_grid. The model spec must have the same limit parameters.
RobustnessReport robustness_experiment(const SelectionModel& model,
                                       const SelectionModel& generalized,
                                       std::span<const double> eps_grid,
                                       std::size_t n_paths, const SimConfig& cfg,
                                       const RunOptions& opts);

struct InvarianceReport {
  std::vector<SelectionEstimate> estimates;
  /// Largest pairwise |p+ difference| minus its combined half-width.
  double worst_margin = 0.0;
  bool pass = false;
};

/// Pairwise comparison of p+ estimates along eps_list. Requires at least
/// three entries spanning at least two decades.
InvarianceReport eps_invariance_check(const SelectionModel& spec,
                                      std::span<const double> eps_list,
                                      std::size_t n_paths, const SimConfig& cfg,
                                      const RunOptions& opts);

struct ExitBoxRow {
  double eps = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_exited = 0;
  ProportionInterval ci;

  double exit_fraction() const noexcept;
};

/// Rescaled runs with box half-width R and horizon T0: share of paths that
/// leave [-R, R] by T0.
std::vector<ExitBoxRow> exit_box_experiment(const SelectionModel& spec,
                                            std::span<const double> eps_grid,
                                            double box_r, double horizon_t0,
                                            std::size_t n_paths, const SimConfig& cfg,
                                            const RunOptions& opts);

}  // namespace levysel
