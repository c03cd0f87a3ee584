#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <variant>

#include "levysel/rng.hpp"
#include "levysel/slowly_varying.hpp"

namespace levysel {

/// Tail constants of a strictly alpha-stable jump measure:
/// nu([z, inf)) = c_plus z^-alpha, nu((-inf, -z]) = c_minus z^-alpha.
struct StableTailSpec {
  double alpha = 1.5;
  double c_plus = 1.0;
  double c_minus = 1.0;

  void validate() const;
  StableTailSpec mirrored() const { return {alpha, c_minus, c_plus}; }
  friend bool operator==(const StableTailSpec&, const StableTailSpec&) = default;
};

/// Levy process with regularly varying, truncated jump measure.
///
/// For 0 < z < M the right tail is
///   nu([z, inf)) = c_plus * (z^-alpha l_nu(1/z) - M^-alpha l_nu(1/M)),
/// and zero for z >= M (left tail likewise with c_minus). The subtracted
/// constant removes the atom a hard cut would leave at +-M, and is
/// negligible as z -> 0. `truncation_m` may be +inf only when l_nu is
/// constant, which gives back the pure stable measure.
///
/// Increments are compound Poisson for |z| above a cutoff r, compensated,
/// plus a moment-matched Gaussian for the jumps below r. The cutoff is
/// either the absolute `small_jump_cutoff`, or, when `jumps_per_step > 0`,
/// chosen per step size so that the expected number of large jumps per
/// increment equals `jumps_per_step`.
struct GeneralizedNoiseSpec {
  StableTailSpec tails;
  SlowlyVaryingSpec slow_var_nu;
  double truncation_m = 5.0;
  double mean_drift = 0.0;
  double small_jump_cutoff = 1e-3;
  double jumps_per_step = 0.0;
  double max_jumps_per_step = 1e5;

  void validate() const;
  GeneralizedNoiseSpec mirrored() const {
    GeneralizedNoiseSpec out = *this;
    out.tails = tails.mirrored();
    out.mean_drift = -mean_drift;
    return out;
  }
};

/// Standard Brownian motion; only used for the alpha = 2 reference runs.
struct BrownianSpec {
  friend bool operator==(const BrownianSpec&, const BrownianSpec&) = default;
};

using NoiseSpec = std::variant<StableTailSpec, GeneralizedNoiseSpec, BrownianSpec>;

/// Stability index of the noise (2 for Brownian motion).
double noise_alpha(const NoiseSpec& noise);
/// Slowly varying factor of the jump measure (constant for stable/Brownian).
SlowlyVaryingSpec noise_slow_var(const NoiseSpec& noise);
void validate(const NoiseSpec& noise);
NoiseSpec mirrored(const NoiseSpec& noise);

struct StableMarginal {
  double scale = 1.0;
  double skewness = 0.0;
};

/// Scale and skewness (S1 parametrization, zero mean) of Z(1) for the
/// compensated stable process with the given tail constants.
StableMarginal stable_marginal_params(const StableTailSpec& spec);

struct TailPair {
  double right = 0.0;
  double left = 0.0;
};

TailPair tail_mass(const StableTailSpec& spec, double z);
TailPair tail_mass(const GeneralizedNoiseSpec& spec, double z);
TailPair tail_mass(const NoiseSpec& spec, double z);

/// Thrown when a compound Poisson step would exceed the jump budget.
class JumpBudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Optional per-jump instrumentation of generalized increments.
struct JumpTrace {
  double count_level = std::numeric_limits<double>::infinity();
  std::uint64_t n_jumps = 0;
  std::uint64_t n_above_level = 0;  // jumps z >= count_level (right side)
  double max_abs_jump = 0.0;
};

/// Chambers-Mallows-Stuck sampler for Z(dt), Z strictly alpha-stable.
class StableSampler {
public:
  StableSampler(const StableTailSpec& spec, double dt);

  double operator()(RandomStream& rng) const;

  double dt() const noexcept { return dt_; }
  const StableMarginal& marginal() const noexcept { return marginal_; }

private:
  double alpha_;
  double dt_;
  StableMarginal marginal_;
  double step_scale_;
  double shift_b_;
  double factor_s_;
};

/// Sampler for increments Z(dt) of a generalized (truncated, regularly
/// varying) Levy process. Immutable after construction.
class GeneralizedSampler {
public:
  GeneralizedSampler(const GeneralizedNoiseSpec& spec, double dt);

  double operator()(RandomStream& rng, JumpTrace* trace = nullptr) const;

  double dt() const noexcept { return dt_; }
  /// Jumps with |z| > cutoff are simulated individually.
  double cutoff() const noexcept { return cutoff_; }
  double expected_jumps() const noexcept { return expected_jumps_; }
  /// Mean of the large-jump sum per unit time (removed by compensation).
  double large_jump_mean_rate() const noexcept { return large_mean_rate_; }
  /// Variance per unit time of the jumps below the cutoff.
  double small_jump_variance_rate() const noexcept { return small_var_rate_; }
  /// Jump size z in (0, M) with two-sided tail mass (C+ + C-) g(z) = level.
  double inverse_tail(double level) const;

private:
  /// g(z) = z^-alpha l(1/z) - M^-alpha l(1/M): tail per unit tail constant.
  double unit_tail(double z) const;
  double raw_tail(double z) const;
  double first_moment_above(double r) const;
  double second_moment_below(double r) const;

  GeneralizedNoiseSpec spec_;
  double dt_;
  double c_total_;
  double p_plus_;
  double tail_at_m_;
  double cutoff_;
  double level_cut_;
  double expected_jumps_;
  double large_mean_rate_;
  double small_var_rate_;
};

/// sqrt(dt) * N(0, 1).
class GaussianSampler {
public:
  explicit GaussianSampler(double dt);
  double operator()(RandomStream& rng) const { return sd_ * rng.normal(); }
  double dt() const noexcept { return dt_; }

private:
  double dt_;
  double sd_;
};

double sample_stable_increment(const StableTailSpec& spec, double dt,
                               RandomStream& rng);
double sample_generalized_increment(const GeneralizedNoiseSpec& spec, double dt,
                                    RandomStream& rng,
                                    JumpTrace* trace = nullptr);

/// Noise sampler for a fixed step size, dispatching on the noise kind.
class IncrementSampler {
public:
  IncrementSampler(const NoiseSpec& noise, double dt);
  double operator()(RandomStream& rng, JumpTrace* trace = nullptr) const;
  double dt() const noexcept { return dt_; }

private:
  double dt_;
  std::variant<StableSampler, GeneralizedSampler, GaussianSampler> impl_;
};

}  // namespace levysel
