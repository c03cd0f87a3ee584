#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace levysel {

/// Fixed-order Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
public:
  explicit GaussLegendre(std::size_t order) : nodes_(order), weights_(order) {
    const std::size_t n = order;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
          const double p2 = p1;
          p1 = p0;
          const auto kd = static_cast<double>(k);
          p0 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p2) / kd;
        }
        dp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
        const double dx = p0 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) {
          break;
        }
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes_[i] = -x;
      nodes_[n - 1 - i] = x;
      weights_[i] = w;
      weights_[n - 1 - i] = w;
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      sum += weights_[i] * f(mid + half * nodes_[i]);
    }
    return sum * half;
  }

  /// Composite rule over [a, b] with panels graded geometrically towards `a`
  /// (ratio 1/4); resolves integrands that are smooth on each panel but
  /// lose regularity at the left endpoint.
  template <class F>
  double integrate_graded(F&& f, double a, double b,
                          int levels = 28) const {
    double total = 0.0;
    double hi = b;
    for (int k = 0; k < levels; ++k) {
      const double lo = a + 0.25 * (hi - a);
      total += integrate(f, lo, hi);
      hi = lo;
    }
    total += integrate(f, a, hi);
    return total;
  }

  std::size_t order() const noexcept { return nodes_.size(); }

private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Shared 16-point rule.
inline const GaussLegendre& gauss_legendre_16() {
  static const GaussLegendre rule(16);
  return rule;
}

}  // namespace levysel
