#include "levysel/levy_noise.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "levysel/quadrature.hpp"

namespace levysel {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

void StableTailSpec::validate() const {
  require(alpha > 1.0 && alpha < 2.0, "noise.alpha must lie in (1, 2)");
  require(c_plus >= 0.0 && std::isfinite(c_plus), "noise.c_plus must be >= 0");
  require(c_minus >= 0.0 && std::isfinite(c_minus),
          "noise.c_minus must be >= 0");
  require(c_plus + c_minus > 0.0, "noise.c_plus + noise.c_minus must be > 0");
}

void GeneralizedNoiseSpec::validate() const {
  tails.validate();
  slow_var_nu.validate("noise.l_nu");
  require(truncation_m > 0.0, "noise.truncation must be positive");
  require(std::isfinite(truncation_m) || slow_var_nu.is_constant(),
          "noise.truncation may be infinite only for constant l_nu");
  require(std::isfinite(mean_drift), "noise.mean_drift must be finite");
  require(small_jump_cutoff > 0.0, "noise.small_jump_cutoff must be positive");
  require(jumps_per_step >= 0.0 && std::isfinite(jumps_per_step),
          "noise.jumps_per_step must be >= 0");
  require(max_jumps_per_step > 0.0, "noise.max_jumps_per_step must be positive");
}

double noise_alpha(const NoiseSpec& noise) {
  return std::visit(Overloaded{
                        [](const StableTailSpec& s) { return s.alpha; },
                        [](const GeneralizedNoiseSpec& s) { return s.tails.alpha; },
                        [](const BrownianSpec&) { return 2.0; },
                    },
                    noise);
}

SlowlyVaryingSpec noise_slow_var(const NoiseSpec& noise) {
  if (const auto* g = std::get_if<GeneralizedNoiseSpec>(&noise)) {
    return g->slow_var_nu;
  }
  return {};
}

void validate(const NoiseSpec& noise) {
  std::visit(Overloaded{
                 [](const StableTailSpec& s) { s.validate(); },
                 [](const GeneralizedNoiseSpec& s) { s.validate(); },
                 [](const BrownianSpec&) {},
             },
             noise);
}

NoiseSpec mirrored(const NoiseSpec& noise) {
  return std::visit(Overloaded{
                        [](const StableTailSpec& s) -> NoiseSpec { return s.mirrored(); },
                        [](const GeneralizedNoiseSpec& s) -> NoiseSpec {
                          return s.mirrored();
                        },
                        [](const BrownianSpec& s) -> NoiseSpec { return s; },
                    },
                    noise);
}

StableMarginal stable_marginal_params(const StableTailSpec& spec) {
  spec.validate();
  const double a = spec.alpha;
  const double c_sum = spec.c_plus + spec.c_minus;
  // Both factors are negative for alpha in (1, 2).
  const double scale_pow = std::tgamma(1.0 - a) * std::cos(kPi * a / 2.0) * c_sum;
  return {std::pow(scale_pow, 1.0 / a), (spec.c_plus - spec.c_minus) / c_sum};
}

TailPair tail_mass(const StableTailSpec& spec, double z) {
  require(z > 0.0, "tail_mass: z must be positive");
  const double base = std::pow(z, -spec.alpha);
  return {spec.c_plus * base, spec.c_minus * base};
}

TailPair tail_mass(const GeneralizedNoiseSpec& spec, double z) {
  require(z > 0.0, "tail_mass: z must be positive");
  const double m = spec.truncation_m;
  if (z >= m) {
    return {0.0, 0.0};
  }
  const double a = spec.tails.alpha;
  double unit = std::pow(z, -a) * spec.slow_var_nu(1.0 / z);
  if (std::isfinite(m)) {
    unit -= std::pow(m, -a) * spec.slow_var_nu(1.0 / m);
  }
  return {spec.tails.c_plus * unit, spec.tails.c_minus * unit};
}

TailPair tail_mass(const NoiseSpec& spec, double z) {
  return std::visit(Overloaded{
                        [z](const StableTailSpec& s) { return tail_mass(s, z); },
                        [z](const GeneralizedNoiseSpec& s) { return tail_mass(s, z); },
                        [z](const BrownianSpec&) {
                          require(z > 0.0, "tail_mass: z must be positive");
                          return TailPair{};
                        },
                    },
                    spec);
}

// ---------------------------------------------------------------------------

StableSampler::StableSampler(const StableTailSpec& spec, double dt)
    : alpha_(spec.alpha), dt_(dt), marginal_(stable_marginal_params(spec)) {
  require(dt > 0.0, "stable sampler: dt must be positive");
  step_scale_ = marginal_.scale * std::pow(dt, 1.0 / alpha_);
  const double t = marginal_.skewness * std::tan(kPi * alpha_ / 2.0);
  shift_b_ = std::atan(t) / alpha_;
  factor_s_ = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha_));
}

double StableSampler::operator()(RandomStream& rng) const {
  const double v = kPi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double av = alpha_ * (v + shift_b_);
  const double x = factor_s_ * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha_) *
                   std::pow(std::cos(v - av) / w, (1.0 - alpha_) / alpha_);
  return step_scale_ * x;
}

// ---------------------------------------------------------------------------

GeneralizedSampler::GeneralizedSampler(const GeneralizedNoiseSpec& spec, double dt)
    : spec_(spec), dt_(dt) {
  spec_.validate();
  require(dt > 0.0, "generalized sampler: dt must be positive");
  c_total_ = spec_.tails.c_plus + spec_.tails.c_minus;
  p_plus_ = spec_.tails.c_plus / c_total_;
  tail_at_m_ = std::isfinite(spec_.truncation_m) ? raw_tail(spec_.truncation_m) : 0.0;

  if (spec_.jumps_per_step > 0.0) {
    level_cut_ = spec_.jumps_per_step / dt_;
    cutoff_ = inverse_tail(level_cut_);
  } else {
    cutoff_ = spec_.small_jump_cutoff;
    level_cut_ = c_total_ * unit_tail(cutoff_);
  }
  expected_jumps_ = level_cut_ * dt_;
  if (expected_jumps_ > spec_.max_jumps_per_step) {
    throw JumpBudgetError("expected " + std::to_string(expected_jumps_) +
                          " jumps per step exceeds the budget of " +
                          std::to_string(spec_.max_jumps_per_step) +
                          "; reduce dt or raise the cutoff");
  }
  large_mean_rate_ = (spec_.tails.c_plus - spec_.tails.c_minus) *
                     (cutoff_ < spec_.truncation_m ? first_moment_above(cutoff_) : 0.0);
  small_var_rate_ =
      c_total_ * second_moment_below(std::min(cutoff_, spec_.truncation_m));
}

double GeneralizedSampler::raw_tail(double z) const {
  return std::pow(z, -spec_.tails.alpha) * spec_.slow_var_nu(1.0 / z);
}

double GeneralizedSampler::unit_tail(double z) const {
  if (z >= spec_.truncation_m) {
    return 0.0;
  }
  return raw_tail(z) - tail_at_m_;
}

double GeneralizedSampler::inverse_tail(double level) const {
  const double a = spec_.tails.alpha;
  const double target = level / c_total_ + tail_at_m_;
  const SlowlyVaryingSpec& l = spec_.slow_var_nu;
  if (l.is_constant()) {
    return std::pow(target / l.c, -1.0 / a);
  }
  const double log_target = std::log(target);
  const double s_max = std::log(spec_.truncation_m);
  // Newton on s = log z for log g_raw(e^s) = log target; the pure power
  // solution plus one substitution step is already close.
  double s = -(log_target - std::log(l.c)) / a;
  s = (std::log(l(std::exp(-s))) - log_target) / a;
  for (int it = 0; it < 50; ++it) {
    const double f = -a * s + std::log(l(std::exp(-s))) - log_target;
    const double df = -a + l.log_slope_reciprocal(s);
    const double step = f / df;
    s -= step;
    s = std::min(s, s_max);
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(s))) {
      break;
    }
  }
  return std::exp(s);
}

double GeneralizedSampler::first_moment_above(double r) const {
  // int_{(r, M]} z nu_unit(dz) = r g(r) + int_r^M g(z) dz
  const double a = spec_.tails.alpha;
  const double m = spec_.truncation_m;
  const SlowlyVaryingSpec& l = spec_.slow_var_nu;
  if (l.is_constant()) {
    if (!std::isfinite(m)) {
      return l.c * a * std::pow(r, 1.0 - a) / (a - 1.0);
    }
    const double integral =
        l.c * (std::pow(r, 1.0 - a) - std::pow(m, 1.0 - a)) / (a - 1.0) -
        tail_at_m_ * (m - r);
    return r * unit_tail(r) + integral;
  }
  const auto& gl = gauss_legendre_16();
  const double s0 = std::log(r);
  const double s1 = std::log(m);
  const int panels = std::max(8, static_cast<int>(std::ceil((s1 - s0) * 2.0)));
  const double h = (s1 - s0) / panels;
  double integral = 0.0;
  for (int i = 0; i < panels; ++i) {
    integral += gl.integrate(
        [&](double s) {
          const double z = std::exp(s);
          return unit_tail(z) * z;
        },
        s0 + i * h, s0 + (i + 1) * h);
  }
  return r * unit_tail(r) + integral;
}

double GeneralizedSampler::second_moment_below(double r) const {
  // int_{(0, r]} z^2 nu_unit(dz) = -r^2 h(r) + 2 int_0^r z h(z) dz,
  // h the unshifted tail; the truncation shift cancels.
  const double a = spec_.tails.alpha;
  const SlowlyVaryingSpec& l = spec_.slow_var_nu;
  if (l.is_constant()) {
    return l.c * a * std::pow(r, 2.0 - a) / (2.0 - a);
  }
  const auto& gl = gauss_legendre_16();
  const double s1 = std::log(r);
  const double s0 = s1 - 60.0 / (2.0 - a);
  const int panels = 64;
  const double h = (s1 - s0) / panels;
  double integral = 0.0;
  for (int i = 0; i < panels; ++i) {
    integral += gl.integrate(
        [&](double s) {
          const double z = std::exp(s);
          return raw_tail(z) * z * z;
        },
        s0 + i * h, s0 + (i + 1) * h);
  }
  return -r * r * raw_tail(r) + 2.0 * integral;
}

double GeneralizedSampler::operator()(RandomStream& rng, JumpTrace* trace) const {
  double x = (spec_.mean_drift - large_mean_rate_) * dt_ +
             std::sqrt(small_var_rate_ * dt_) * rng.normal();
  double jumps = 0.0;
  double gamma = 0.0;
  for (;;) {
    gamma += rng.exponential();
    if (gamma > expected_jumps_) {
      break;
    }
    const double size = inverse_tail(gamma / dt_);
    const double z = rng.uniform() < p_plus_ ? size : -size;
    jumps += z;
    if (trace != nullptr) {
      ++trace->n_jumps;
      trace->max_abs_jump = std::max(trace->max_abs_jump, size);
      if (z >= trace->count_level) {
        ++trace->n_above_level;
      }
    }
  }
  return x + jumps;
}

// ---------------------------------------------------------------------------

GaussianSampler::GaussianSampler(double dt) : dt_(dt), sd_(std::sqrt(dt)) {
  require(dt > 0.0, "gaussian sampler: dt must be positive");
}

double sample_stable_increment(const StableTailSpec& spec, double dt,
                               RandomStream& rng) {
  return StableSampler(spec, dt)(rng);
}

double sample_generalized_increment(const GeneralizedNoiseSpec& spec, double dt,
                                    RandomStream& rng, JumpTrace* trace) {
  return GeneralizedSampler(spec, dt)(rng, trace);
}

namespace {

std::variant<StableSampler, GeneralizedSampler, GaussianSampler> make_impl(
    const NoiseSpec& noise, double dt) {
  using Impl = std::variant<StableSampler, GeneralizedSampler, GaussianSampler>;
  return std::visit(Overloaded{
                        [dt](const StableTailSpec& s) -> Impl { return StableSampler(s, dt); },
                        [dt](const GeneralizedNoiseSpec& s) -> Impl {
                          return GeneralizedSampler(s, dt);
                        },
                        [dt](const BrownianSpec&) -> Impl { return GaussianSampler(dt); },
                    },
                    noise);
}

}  // namespace

IncrementSampler::IncrementSampler(const NoiseSpec& noise, double dt)
    : dt_(dt), impl_(make_impl(noise, dt)) {}

double IncrementSampler::operator()(RandomStream& rng, JumpTrace* trace) const {
  return std::visit(Overloaded{
                        [&](const StableSampler& s) { return s(rng); },
                        [&](const GeneralizedSampler& s) { return s(rng, trace); },
                        [&](const GaussianSampler& s) { return s(rng); },
                    },
                    impl_);
}

}  // namespace levysel
