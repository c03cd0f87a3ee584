#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "levysel/drift_field.hpp"
#include "levysel/levy_noise.hpp"
#include "levysel/slowly_varying.hpp"

namespace levysel {

/// Time-space scales: Y(t) = X(eps_prime t) / eps_second.
struct ScaleTriple {
  double eps = 1.0;
  double eps_prime = 1.0;
  double eps_second = 1.0;
};

struct ScaleResiduals {
  /// |(eps''/eps') / ((eps'')^beta l(1/eps'')) - 1|
  double drift_balance = 0.0;
  /// |eps' / ((eps''/eps)^alpha / l_nu(eps/eps'')) - 1|
  double noise_balance = 0.0;
};

class ScaleSolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

ScaleResiduals scale_residuals(const ScaleTriple& s, double alpha, double beta,
                               const SlowlyVaryingSpec& l,
                               const SlowlyVaryingSpec& l_nu);

/// Solves the two balance relations for (eps', eps'') at given eps.
///
/// Pure power case (constant l and l_nu equal to 1) is returned in closed
/// form. Otherwise a damped fixed-point iteration in (log eps', log eps'')
/// seeded at the power solution runs until both residuals are below `tol`.
/// alpha = 2 is accepted for the Brownian reference runs.
ScaleTriple solve_scales(double eps, double alpha, double beta,
                         const SlowlyVaryingSpec& l,
                         const SlowlyVaryingSpec& l_nu, double tol = 1e-10,
                         int max_iter = 500);

/// Convenience overload taking the exponents and slowly varying factors
/// from the drift and noise specs.
ScaleTriple solve_scales(double eps, const DriftSpec& drift, const NoiseSpec& noise,
                         double tol = 1e-10);

/// nu_eps([z, inf)) = eps' nu([eps'' z / eps, inf)) and the mirrored left tail.
TailPair rescaled_tail(const NoiseSpec& noise, const ScaleTriple& scales, double z);

/// Uniform envelope C (z^-(alpha-delta) v z^-(alpha+delta)) for the sum of
/// both rescaled tails.
struct TailBound {
  double constant = 1.0;
  double delta = 0.1;
  double operator()(double z, double alpha) const;
};

struct TailReportRow {
  double eps = 0.0;
  double z = 0.0;
  Side side = Side::plus;
  double nu_eps = 0.0;
  double nu_alpha = 0.0;
  double abs_err = 0.0;
  /// Set when nu_eps of both tails at (eps, z) exceeds the uniform bound.
  bool bound_violation = false;
};

/// Rows ordered by eps (input order), then z, then side.
std::vector<TailReportRow> tail_convergence_report(
    const NoiseSpec& noise, std::span<const double> z_grid,
    std::span<const ScaleTriple> scales,
    const std::optional<TailBound>& bound = std::nullopt);

/// Columns: eps,z,side,nu_eps,nu_alpha,abs_err
void write_tail_report_csv(std::ostream& os, std::span<const TailReportRow> rows);

}  // namespace levysel
