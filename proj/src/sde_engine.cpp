#include "levysel/sde_engine.hpp"

#include <cmath>
#include <iomanip>
#include <string>

#include "levysel/ensemble.hpp"

namespace levysel {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("sim.dt must be positive");
  }
  if (!(horizon > dt) || !std::isfinite(horizon)) {
    throw std::invalid_argument("sim.horizon must exceed sim.dt");
  }
  if (!(exit_level > 0.0)) {
    throw std::invalid_argument("sim.exit_level must be positive");
  }
  if (record_stride == 0) {
    throw std::invalid_argument("sim.record_stride must be positive");
  }
  if (max_steps == 0) {
    throw std::invalid_argument("sim.max_steps must be positive");
  }
}

std::uint64_t SimConfig::steps() const {
  return static_cast<std::uint64_t>(std::floor(horizon / dt + 1e-9));
}

PathSimulator::PathSimulator(const DriftSpec& drift, const DiffusionSpec& diffusion,
                             const NoiseSpec& noise, const SimConfig& cfg,
                             double noise_dt, double space_scale, double drift_factor,
                             double noise_scale, double noise_coeff)
    : drift_(drift),
      diffusion_(diffusion),
      cfg_(cfg),
      sampler_(noise, noise_dt),
      space_scale_(space_scale),
      drift_factor_(drift_factor),
      noise_scale_(noise_scale),
      noise_coeff_(noise_coeff) {}

PathSimulator PathSimulator::macroscopic(const DriftSpec& drift,
                                         const DiffusionSpec& diffusion,
                                         const NoiseSpec& noise, double eps,
                                         const SimConfig& cfg) {
  drift.validate();
  diffusion.validate();
  validate(noise);
  cfg.validate();
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("eps must be >= 0");
  }
  return PathSimulator(drift, diffusion, noise, cfg, cfg.dt, 1.0, 1.0, 1.0, eps);
}

PathSimulator PathSimulator::rescaled(const DriftSpec& drift,
                                      const DiffusionSpec& diffusion,
                                      const NoiseSpec& noise, const ScaleTriple& scales,
                                      const SimConfig& cfg) {
  drift.validate();
  diffusion.validate();
  validate(noise);
  cfg.validate();
  if (!(scales.eps > 0.0 && scales.eps_prime > 0.0 && scales.eps_second > 0.0)) {
    throw std::invalid_argument("scales must be positive");
  }
  return PathSimulator(drift, diffusion, noise, cfg, scales.eps_prime * cfg.dt,
                       scales.eps_second, scales.eps_prime / scales.eps_second,
                       scales.eps / scales.eps_second, 1.0);
}

PathSample PathSimulator::run(double x0, RandomStream& rng) const {
  const std::uint64_t n = cfg_.steps();
  if (n > cfg_.max_steps) {
    throw StepBudgetError("path needs " + std::to_string(n) +
                          " steps, budget is " + std::to_string(cfg_.max_steps));
  }
  PathSample path;
  const std::size_t expected = std::min<std::uint64_t>(n / cfg_.record_stride + 2, 1u << 20);
  path.times.reserve(expected);
  path.values.reserve(expected);
  path.noise_integral.reserve(expected);
  auto record = [&](double t, double x, double integral) {
    path.times.push_back(t);
    path.values.push_back(x);
    path.noise_integral.push_back(integral);
  };

  const double dt = cfg_.dt;
  const bool noisy = noise_coeff_ != 0.0;
  double x = x0;
  double integral = 0.0;
  record(0.0, x, integral);
  for (std::uint64_t k = 1; k <= n; ++k) {
    const double drift = drift_factor_ * eval_drift(drift_, space_scale_ * x);
    double next = x + drift * dt;
    if (noisy) {
      const double dz = noise_scale_ * sampler_(rng);
      const double b = diffusion_(space_scale_ * x);
      next += noise_coeff_ * b * dz;
      integral += b * dz;
    }
    if (!std::isfinite(next)) {
      throw NumericalBlowUpError("non-finite state at step " + std::to_string(k));
    }
    x = next;
    const double t = static_cast<double>(k) * dt;
    if (std::abs(x) > cfg_.exit_level) {
      record(t, x, integral);
      path.exit = ExitRecord{t, x > 0.0 ? Side::plus : Side::minus, x};
      break;
    }
    if (k % cfg_.record_stride == 0 || k == n) {
      record(t, x, integral);
    }
  }
  return path;
}

PathSample simulate_path(const DriftSpec& drift, const DiffusionSpec& diffusion,
                         const NoiseSpec& noise, double eps, double x0,
                         const SimConfig& cfg, RandomStream& rng) {
  return PathSimulator::macroscopic(drift, diffusion, noise, eps, cfg).run(x0, rng);
}

PathSample simulate_rescaled(const DriftSpec& drift, const DiffusionSpec& diffusion,
                             const NoiseSpec& noise, const ScaleTriple& scales,
                             const SimConfig& cfg, RandomStream& rng) {
  return PathSimulator::rescaled(drift, diffusion, noise, scales, cfg).run(0.0, rng);
}

std::optional<ExitRecord> first_exit(const PathSample& path, double level) {
  if (!(level > 0.0)) {
    throw std::invalid_argument("first_exit: level must be positive");
  }
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    const double v = path.values[i];
    if (v > level) {
      return ExitRecord{path.times[i], Side::plus, v};
    }
    if (v < -level) {
      return ExitRecord{path.times[i], Side::minus, v};
    }
  }
  return std::nullopt;
}

double noise_growth_statistic(const PathSample& path, double gamma, double delta) {
  if (!(gamma > 1.0 && gamma < 2.0)) {
    throw std::invalid_argument("noise_growth_statistic: gamma must lie in (1, 2)");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("noise_growth_statistic: delta must be positive");
  }
  if (path.noise_integral.size() != path.times.size()) {
    throw std::invalid_argument("noise_growth_statistic: path carries no noise integral");
  }
  const double power = 1.0 / gamma + delta;
  double stat = 0.0;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    stat = std::max(stat, std::abs(path.noise_integral[i]) /
                              (1.0 + std::pow(path.times[i], power)));
  }
  return stat;
}

std::vector<double> sample_rescaled_noise(const NoiseSpec& noise, const ScaleTriple& scales,
                                          double t, std::size_t n, std::uint64_t seed,
                                          std::uint64_t experiment_index,
                                          std::size_t workers) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("sample_rescaled_noise: t must be positive");
  }
  const IncrementSampler sampler(noise, scales.eps_prime * t);
  const double factor = scales.eps / scales.eps_second;
  return run_ensemble<double>(n, workers, [&](std::size_t i) {
    RandomStream rng(seed, derive_stream_id(experiment_index, i));
    return factor * sampler(rng);
  });
}

void write_path_csv(std::ostream& os, const PathSample& path) {
  os << "t,x,noise_integral\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    os << path.times[i] << ',' << path.values[i] << ',' << path.noise_integral[i] << '\n';
  }
}

}  // namespace levysel
