#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace levysel {

/// Log-power slowly varying function l(x) = c * log(e + x)^rho.
struct SlowlyVaryingSpec {
  double c = 1.0;
  double rho = 0.0;

  double operator()(double x) const {
    if (rho == 0.0) {
      return c;
    }
    return c * std::pow(std::log(std::numbers::e + x), rho);
  }

  /// d log l(e^{-s}) / ds, the log-derivative along s = log z of l(1/z).
  double log_slope_reciprocal(double s) const {
    if (rho == 0.0) {
      return 0.0;
    }
    const double w = std::exp(-s);
    const double lg = std::log(std::numbers::e + w);
    return -rho * w / ((std::numbers::e + w) * lg);
  }

  bool is_constant() const noexcept { return rho == 0.0; }

  void validate(const std::string& where = "l") const {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument(where + "_c must be positive");
    }
    if (!(rho >= -2.0 && rho <= 2.0)) {
      throw std::invalid_argument(where + "_rho must lie in [-2, 2]");
    }
  }

  friend bool operator==(const SlowlyVaryingSpec&,
                         const SlowlyVaryingSpec&) = default;
};

}  // namespace levysel
