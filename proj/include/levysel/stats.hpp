#pragma once

#include <span>
#include <vector>

namespace levysel {

struct ProportionInterval {
  double lower = 0.0;
  double upper = 1.0;
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

/// Two-sided 95% Wilson score interval for `successes` out of `trials`.
/// Returns [0, 1] when trials == 0.
ProportionInterval wilson_interval(double successes, double trials,
                                   double z = 1.959963984540054);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
/// Copies and sorts its inputs; ties are handled exactly.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Same statistic for inputs that are already sorted ascending.
double ks_two_sample_sorted(std::span<const double> a, std::span<const double> b);

/// Asymptotic p-value of the two-sample KS statistic (Kolmogorov series).
double ks_p_value(double statistic, std::size_t n_a, std::size_t n_b);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate mean_with_error(std::span<const double> values);

}  // namespace levysel
