#include "levysel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levysel {

ProportionInterval wilson_interval(double successes, double trials, double z) {
  if (trials < 0.0 || successes < 0.0 || successes > trials) {
    throw std::invalid_argument("wilson_interval: need 0 <= successes <= trials");
  }
  if (trials == 0.0) {
    return {0.0, 1.0};
  }
  const double p = successes / trials;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / trials;
  const double centre = (p + z2 / (2.0 * trials)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double ks_two_sample_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: samples must be nonempty");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) {
      ++i;
    }
    while (j < b.size() && b[j] == x) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return ks_two_sample_sorted(sa, sb);
}

double ks_p_value(double statistic, std::size_t n_a, std::size_t n_b) {
  if (n_a == 0 || n_b == 0) {
    throw std::invalid_argument("ks_p_value: sample sizes must be positive");
  }
  const double ne = static_cast<double>(n_a) * static_cast<double>(n_b) /
                    static_cast<double>(n_a + n_b);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * statistic;
  if (lambda < 1e-3) {
    return 1.0;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) {
      break;
    }
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile: empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile: q must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

MeanEstimate mean_with_error(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("mean_with_error: need at least two values");
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (const double v : values) {
    mean += v;
  }
  mean /= n;
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace levysel
