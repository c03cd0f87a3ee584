#pragma once

#include <string>
#include <string_view>

#include "levysel/slowly_varying.hpp"

namespace levysel {

enum class Side { plus, minus };

inline const char* to_string(Side side) {
  return side == Side::plus ? "plus" : "minus";
}

/// Multiplicative drift perturbation L~(x) with L~(0+) = 1.
///
///   one           1
///   power:c,p     1 + c x^p        (c >= 0, p > 0)
///   sinbump:c,w   1 + c sin^2(x/w) (c > -1, w > 0)
struct Perturbation {
  enum class Kind { one, power, sinbump };
  Kind kind = Kind::one;
  double c = 0.0;
  double p = 1.0;

  double operator()(double x) const;
  bool is_one() const noexcept { return kind == Kind::one; }
  void validate(const std::string& where) const;

  static Perturbation parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

/// Drift a(x) = x^beta L+(x) for x > 0, -|x|^beta L-(|x|) for x < 0, with
/// L+-(x) = A+- L~+-(x) l(1/x), evaluated at min(x, 1) when trunc_at_one.
struct DriftSpec {
  double beta = 0.5;
  double a_plus = 1.0;
  double a_minus = 1.0;
  Perturbation perturb_plus;
  Perturbation perturb_minus;
  SlowlyVaryingSpec slow_var_l;
  bool trunc_at_one = true;

  void validate() const;
  /// Piecewise power drift: no perturbations and constant l.
  bool is_model() const noexcept;
  /// L+-(x) for x > 0.
  double local_factor(Side side, double x) const;
  /// Swaps the roles of the two half-lines.
  DriftSpec mirrored() const;
  /// Piecewise power drift with the same (beta, A+, A-).
  DriftSpec model_limit() const;
};

/// Bounded diffusion coefficient b with b(0) > 0.
///
///   const:b0        b0
///   rational:b0,c   b0 + c x^2 / (1 + x^2)
///   tanh:b0,c       b0 + c tanh(x)
struct DiffusionSpec {
  enum class Kind { constant, rational, tanh };
  Kind kind = Kind::constant;
  double b0 = 1.0;
  double c = 0.0;

  double operator()(double x) const;
  double b_zero() const noexcept { return b0; }
  double sup_abs() const noexcept;
  bool is_constant() const noexcept { return kind == Kind::constant || c == 0.0; }
  void validate() const;
  /// x -> b(-x).
  DiffusionSpec mirrored() const;

  static DiffusionSpec constant_value(double b0) { return {Kind::constant, b0, 0.0}; }
  static DiffusionSpec parse(std::string_view text);
  std::string to_string() const;
};

double eval_drift(const DriftSpec& spec, double x);

/// A+(x) = int_0^x dy / a(y) for x > 0, A-(x) likewise for x < 0.
double time_primitive(const DriftSpec& spec, double x);

/// Inverse of A+- on [0, inf): the r >= 0 with A+-(+-r) = t.
double time_primitive_inverse(const DriftSpec& spec, double t, Side side);

/// Unique solution of x' = a(x), x(0) = x0 != 0, evaluated at t.
double flow_solution(const DriftSpec& spec, double x0, double t);

/// Maximal (plus) / minimal (minus) solution from the origin: +-A+-^{-1}(t).
double extremal_solution(const DriftSpec& spec, double t, Side side);

}  // namespace levysel
