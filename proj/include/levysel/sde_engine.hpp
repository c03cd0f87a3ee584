#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "levysel/drift_field.hpp"
#include "levysel/levy_noise.hpp"
#include "levysel/rng.hpp"
#include "levysel/scaling.hpp"

namespace levysel {

struct SimConfig {
  double dt = 1e-2;
  double horizon = 50.0;
  /// Paths stop at the first step with |value| > exit_level.
  double exit_level = 10.0;
  std::size_t record_stride = 1;
  std::uint64_t max_steps = 100'000'000;

  void validate() const;
  std::uint64_t steps() const;
};

struct ExitRecord {
  double time = 0.0;
  Side side = Side::plus;
  double value = 0.0;  // overshoot included
};

struct PathSample {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> noise_integral;
  std::optional<ExitRecord> exit;
};

class StepBudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalBlowUpError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Explicit Euler integrator for dX = a(X) dt + eps b(X-) dZ, either in
/// macroscopic variables or in the rescaled variables
/// Y(t) = X(eps' t) / eps'', where it integrates
/// dY = a_eps(Y) dt + b_eps(Y-) dZ_eps with a_eps(y) = a(eps'' y) eps'/eps'',
/// b_eps(y) = b(eps'' y) and Z_eps(t) = Z(eps' t) eps/eps''.
///
/// One aggregated noise increment is drawn per step. Immutable after
/// construction and safe to share across threads.
class PathSimulator {
public:
  static PathSimulator macroscopic(const DriftSpec& drift, const DiffusionSpec& diffusion,
                                   const NoiseSpec& noise, double eps,
                                   const SimConfig& cfg);
  static PathSimulator rescaled(const DriftSpec& drift, const DiffusionSpec& diffusion,
                                const NoiseSpec& noise, const ScaleTriple& scales,
                                const SimConfig& cfg);

  PathSample run(double x0, RandomStream& rng) const;

  const SimConfig& config() const noexcept { return cfg_; }

private:
  PathSimulator(const DriftSpec& drift, const DiffusionSpec& diffusion,
                const NoiseSpec& noise, const SimConfig& cfg, double noise_dt,
                double space_scale, double drift_factor, double noise_scale,
                double noise_coeff);

  DriftSpec drift_;
  DiffusionSpec diffusion_;
  SimConfig cfg_;
  IncrementSampler sampler_;
  double space_scale_;
  double drift_factor_;
  double noise_scale_;
  double noise_coeff_;
};

PathSample simulate_path(const DriftSpec& drift, const DiffusionSpec& diffusion,
                         const NoiseSpec& noise, double eps, double x0,
                         const SimConfig& cfg, RandomStream& rng);

/// Starts at Y(0) = 0.
PathSample simulate_rescaled(const DriftSpec& drift, const DiffusionSpec& diffusion,
                             const NoiseSpec& noise, const ScaleTriple& scales,
                             const SimConfig& cfg, RandomStream& rng);

/// Earliest recorded point with value > level (plus) or < -level (minus).
std::optional<ExitRecord> first_exit(const PathSample& path, double level);

/// max_k |noise_integral(t_k)| / (1 + t_k^(1/gamma + delta)).
double noise_growth_statistic(const PathSample& path, double gamma, double delta);

/// n independent draws of Z_eps(t) = Z(eps' t) eps / eps''; draw i uses
/// stream derive_stream_id(experiment_index, i).
std::vector<double> sample_rescaled_noise(const NoiseSpec& noise, const ScaleTriple& scales,
                                          double t, std::size_t n, std::uint64_t seed,
                                          std::uint64_t experiment_index,
                                          std::size_t workers = 1);

/// Columns: t,x,noise_integral
void write_path_csv(std::ostream& os, const PathSample& path);

}  // namespace levysel
