#include "levysel/scaling.hpp"

#include <cmath>
#include <iomanip>
#include <string>

namespace levysel {

ScaleResiduals scale_residuals(const ScaleTriple& s, double alpha, double beta,
                               const SlowlyVaryingSpec& l,
                               const SlowlyVaryingSpec& l_nu) {
  const double drift_ratio =
      (s.eps_second / s.eps_prime) /
      (std::pow(s.eps_second, beta) * l(1.0 / s.eps_second));
  const double noise_ratio =
      s.eps_prime /
      (std::pow(s.eps_second / s.eps, alpha) / l_nu(s.eps / s.eps_second));
  return {std::abs(drift_ratio - 1.0), std::abs(noise_ratio - 1.0)};
}

ScaleTriple solve_scales(double eps, double alpha, double beta,
                         const SlowlyVaryingSpec& l, const SlowlyVaryingSpec& l_nu,
                         double tol, int max_iter) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("solve_scales: eps must lie in (0, 1]");
  }
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("solve_scales: alpha must lie in (1, 2]");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("solve_scales: beta must lie in (0, 1)");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("solve_scales: tol must be positive");
  }
  l.validate("l");
  l_nu.validate("l_nu");

  const double time_exponent = 1.0 / (1.0 / (1.0 - beta) - 1.0 / alpha);
  const double space_exponent = 1.0 / (1.0 - beta);
  const bool pure_power = l.is_constant() && l.c == 1.0 && l_nu.is_constant() &&
                          l_nu.c == 1.0;
  if (pure_power) {
    const double eps_prime = std::pow(eps, time_exponent);
    return {eps, eps_prime, std::pow(eps_prime, space_exponent)};
  }

  const double log_eps = std::log(eps);
  double u = time_exponent * log_eps;
  double v = space_exponent * u;
  constexpr double kDamping = 0.7;
  for (int it = 0; it < max_iter; ++it) {
    const double v_target = log_eps + (u + std::log(l_nu(eps * std::exp(-v)))) / alpha;
    v += kDamping * (v_target - v);
    const double u_target = (1.0 - beta) * v - std::log(l(std::exp(-v)));
    u += kDamping * (u_target - u);

    const ScaleTriple s{eps, std::exp(u), std::exp(v)};
    const ScaleResiduals r = scale_residuals(s, alpha, beta, l, l_nu);
    if (r.drift_balance <= 1e-3 * tol && r.noise_balance <= 1e-3 * tol) {
      return s;
    }
    if (!std::isfinite(u) || !std::isfinite(v)) {
      break;
    }
  }
  const ScaleTriple s{eps, std::exp(u), std::exp(v)};
  const ScaleResiduals r = scale_residuals(s, alpha, beta, l, l_nu);
  if (r.drift_balance <= tol && r.noise_balance <= tol) {
    return s;
  }
  throw ScaleSolverError("solve_scales did not converge for eps=" +
                         std::to_string(eps) + " (residuals " +
                         std::to_string(r.drift_balance) + ", " +
                         std::to_string(r.noise_balance) + ")");
}

ScaleTriple solve_scales(double eps, const DriftSpec& drift, const NoiseSpec& noise,
                         double tol) {
  return solve_scales(eps, noise_alpha(noise), drift.beta, drift.slow_var_l,
                      noise_slow_var(noise), tol);
}

TailPair rescaled_tail(const NoiseSpec& noise, const ScaleTriple& scales, double z) {
  if (!(z > 0.0)) {
    throw std::invalid_argument("rescaled_tail: z must be positive");
  }
  const TailPair raw = tail_mass(noise, scales.eps_second * z / scales.eps);
  return {scales.eps_prime * raw.right, scales.eps_prime * raw.left};
}

double TailBound::operator()(double z, double alpha) const {
  return constant * std::max(std::pow(z, -(alpha - delta)), std::pow(z, -(alpha + delta)));
}

std::vector<TailReportRow> tail_convergence_report(
    const NoiseSpec& noise, std::span<const double> z_grid,
    std::span<const ScaleTriple> scales, const std::optional<TailBound>& bound) {
  if (z_grid.empty() || scales.empty()) {
    throw std::invalid_argument("tail_convergence_report: grids must be nonempty");
  }
  const double alpha = noise_alpha(noise);
  StableTailSpec limit;
  if (const auto* s = std::get_if<StableTailSpec>(&noise)) {
    limit = *s;
  } else if (const auto* g = std::get_if<GeneralizedNoiseSpec>(&noise)) {
    limit = g->tails;
  } else {
    throw std::invalid_argument("tail_convergence_report: noise has no jump measure");
  }

  std::vector<TailReportRow> rows;
  rows.reserve(2 * z_grid.size() * scales.size());
  for (const ScaleTriple& s : scales) {
    for (const double z : z_grid) {
      if (!(z > 0.0)) {
        throw std::invalid_argument("tail_convergence_report: z must be positive");
      }
      const TailPair eps_tail = rescaled_tail(noise, s, z);
      const TailPair lim = tail_mass(limit, z);
      const bool violation =
          bound && (eps_tail.right + eps_tail.left) > (*bound)(z, alpha);
      rows.push_back({s.eps, z, Side::plus, eps_tail.right, lim.right,
                      std::abs(eps_tail.right - lim.right), violation});
      rows.push_back({s.eps, z, Side::minus, eps_tail.left, lim.left,
                      std::abs(eps_tail.left - lim.left), violation});
    }
  }
  return rows;
}

void write_tail_report_csv(std::ostream& os, std::span<const TailReportRow> rows) {
  os << "eps,z,side,nu_eps,nu_alpha,abs_err\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.eps << ',' << r.z << ',' << to_string(r.side) << ',' << r.nu_eps << ','
       << r.nu_alpha << ',' << r.abs_err << '\n';
  }
}

}  // namespace levysel
