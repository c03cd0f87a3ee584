#include "levysel/drift_field.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "levysel/quadrature.hpp"

namespace levysel {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

struct ParsedHandle {
  std::string name;
  std::vector<double> params;
};

// "name" or "name:p1,p2,..."
ParsedHandle parse_handle(std::string_view text) {
  ParsedHandle out;
  const auto colon = text.find(':');
  out.name = std::string(text.substr(0, colon));
  if (colon == std::string_view::npos) {
    return out;
  }
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string token(rest.substr(0, comma));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) {
      throw std::invalid_argument("bad numeric parameter '" + token + "' in '" +
                                  std::string(text) + "'");
    }
    out.params.push_back(value);
    if (comma == std::string_view::npos) {
      break;
    }
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

// --- Perturbation ------------------------------------------------------------

double Perturbation::operator()(double x) const {
  switch (kind) {
    case Kind::one:
      return 1.0;
    case Kind::power:
      return 1.0 + c * std::pow(x, p);
    case Kind::sinbump: {
      const double s = std::sin(x / p);
      return 1.0 + c * s * s;
    }
  }
  return 1.0;
}

void Perturbation::validate(const std::string& where) const {
  switch (kind) {
    case Kind::one:
      break;
    case Kind::power:
      require(c >= 0.0 && std::isfinite(c), where + ": power coefficient must be >= 0");
      require(p > 0.0 && std::isfinite(p), where + ": power exponent must be > 0");
      break;
    case Kind::sinbump:
      require(c > -1.0 && std::isfinite(c), where + ": sinbump amplitude must be > -1");
      require(p > 0.0 && std::isfinite(p), where + ": sinbump width must be > 0");
      break;
  }
}

Perturbation Perturbation::parse(std::string_view text) {
  const ParsedHandle h = parse_handle(text);
  if (h.name == "one" && h.params.empty()) {
    return {};
  }
  if (h.name == "power" && h.params.size() == 2) {
    return {Kind::power, h.params[0], h.params[1]};
  }
  if (h.name == "sinbump" && h.params.size() == 2) {
    return {Kind::sinbump, h.params[0], h.params[1]};
  }
  throw std::invalid_argument("unknown perturbation '" + std::string(text) +
                              "' (expected one | power:c,p | sinbump:c,w)");
}

std::string Perturbation::to_string() const {
  switch (kind) {
    case Kind::one:
      return "one";
    case Kind::power:
      return "power:" + format_number(c) + "," + format_number(p);
    case Kind::sinbump:
      return "sinbump:" + format_number(c) + "," + format_number(p);
  }
  return "one";
}

// --- DriftSpec ---------------------------------------------------------------

void DriftSpec::validate() const {
  require(beta > 0.0 && beta < 1.0, "drift.beta must lie in (0, 1)");
  require(a_plus > 0.0 && std::isfinite(a_plus), "drift.a_plus must be positive");
  require(a_minus > 0.0 && std::isfinite(a_minus), "drift.a_minus must be positive");
  perturb_plus.validate("drift.perturb_plus");
  perturb_minus.validate("drift.perturb_minus");
  slow_var_l.validate("drift.l");
}

bool DriftSpec::is_model() const noexcept {
  return perturb_plus.is_one() && perturb_minus.is_one() && slow_var_l.is_constant();
}

double DriftSpec::local_factor(Side side, double x) const {
  const double xe = trunc_at_one ? std::min(x, 1.0) : x;
  const bool plus = side == Side::plus;
  const double amplitude = plus ? a_plus : a_minus;
  const Perturbation& pert = plus ? perturb_plus : perturb_minus;
  return amplitude * pert(xe) * slow_var_l(1.0 / xe);
}

DriftSpec DriftSpec::mirrored() const {
  DriftSpec out = *this;
  std::swap(out.a_plus, out.a_minus);
  std::swap(out.perturb_plus, out.perturb_minus);
  return out;
}

DriftSpec DriftSpec::model_limit() const {
  DriftSpec out;
  out.beta = beta;
  out.a_plus = a_plus;
  out.a_minus = a_minus;
  out.trunc_at_one = trunc_at_one;
  return out;
}

// --- DiffusionSpec -----------------------------------------------------------

double DiffusionSpec::operator()(double x) const {
  switch (kind) {
    case Kind::constant:
      return b0;
    case Kind::rational: {
      const double x2 = x * x;
      return b0 + c * x2 / (1.0 + x2);
    }
    case Kind::tanh:
      return b0 + c * std::tanh(x);
  }
  return b0;
}

double DiffusionSpec::sup_abs() const noexcept {
  switch (kind) {
    case Kind::constant:
      return std::abs(b0);
    case Kind::rational:
      return std::max(std::abs(b0), std::abs(b0 + c));
    case Kind::tanh:
      return std::abs(b0) + std::abs(c);
  }
  return std::abs(b0);
}

void DiffusionSpec::validate() const {
  require(b0 > 0.0 && std::isfinite(b0), "diffusion.b: b(0) must be positive");
  require(std::isfinite(c), "diffusion.b: coefficient must be finite");
}

DiffusionSpec DiffusionSpec::mirrored() const {
  DiffusionSpec out = *this;
  if (kind == Kind::tanh) {
    out.c = -c;
  }
  return out;
}

DiffusionSpec DiffusionSpec::parse(std::string_view text) {
  const ParsedHandle h = parse_handle(text);
  if (h.name == "const" && h.params.size() == 1) {
    return {Kind::constant, h.params[0], 0.0};
  }
  if (h.name == "rational" && h.params.size() == 2) {
    return {Kind::rational, h.params[0], h.params[1]};
  }
  if (h.name == "tanh" && h.params.size() == 2) {
    return {Kind::tanh, h.params[0], h.params[1]};
  }
  throw std::invalid_argument("unknown diffusion '" + std::string(text) +
                              "' (expected const:b0 | rational:b0,c | tanh:b0,c)");
}

std::string DiffusionSpec::to_string() const {
  switch (kind) {
    case Kind::constant:
      return "const:" + format_number(b0);
    case Kind::rational:
      return "rational:" + format_number(b0) + "," + format_number(c);
    case Kind::tanh:
      return "tanh:" + format_number(b0) + "," + format_number(c);
  }
  return "const:" + format_number(b0);
}

// --- ODE layer ---------------------------------------------------------------

double eval_drift(const DriftSpec& spec, double x) {
  if (x > 0.0) {
    return std::pow(x, spec.beta) * spec.local_factor(Side::plus, x);
  }
  if (x < 0.0) {
    return -std::pow(-x, spec.beta) * spec.local_factor(Side::minus, -x);
  }
  return 0.0;
}

namespace {

// A(r) for r > 0 on the given side.
double primitive_magnitude(const DriftSpec& spec, double r, Side side) {
  const double q = 1.0 - spec.beta;
  if (spec.is_model()) {
    return std::pow(r, q) / (q * spec.local_factor(side, 1.0));
  }
  const double r_in = spec.trunc_at_one ? std::min(r, 1.0) : r;
  // y = u^{1/q} turns dy / (y^beta L(y)) into du / (q L(u^{1/q})).
  const double upper = std::pow(r_in, q);
  auto integrand = [&](double u) {
    const double y = std::pow(u, 1.0 / q);
    return 1.0 / (q * spec.local_factor(side, y));
  };
  constexpr int kPanels = 8;
  const double width = upper / kPanels;
  const GaussLegendre& rule = gauss_legendre_16();
  double total = rule.integrate_graded(integrand, 0.0, width);
  for (int k = 1; k < kPanels; ++k) {
    total += rule.integrate(integrand, k * width, (k + 1) * width);
  }
  if (spec.trunc_at_one && r > 1.0) {
    total += (std::pow(r, q) - 1.0) / (q * spec.local_factor(side, 1.0));
  }
  return total;
}

}  // namespace

double time_primitive(const DriftSpec& spec, double x) {
  require(x != 0.0, "time_primitive: x must be nonzero");
  return x > 0.0 ? primitive_magnitude(spec, x, Side::plus)
                 : primitive_magnitude(spec, -x, Side::minus);
}

double time_primitive_inverse(const DriftSpec& spec, double t, Side side) {
  require(t >= 0.0, "time_primitive_inverse: t must be >= 0");
  if (t == 0.0) {
    return 0.0;
  }
  auto prim = [&](double r) { return primitive_magnitude(spec, r, side); };

  // Geometric bracket [lo, hi] with A(lo) <= t < A(hi).
  double hi = 1.0;
  double lo = 0.0;
  if (prim(hi) < t) {
    lo = hi;
    hi *= 2.0;
    while (prim(hi) < t) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    lo = 0.5;
    while (prim(lo) >= t) {
      hi = lo;
      lo *= 0.5;
    }
  }
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (prim(mid) < t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Newton polish: A'(r) = 1 / |a(r)|.
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double a_r = std::pow(r, spec.beta) * spec.local_factor(side, r);
    const double next = r - (prim(r) - t) * a_r;
    if (!(next > 0.0)) {
      break;
    }
    r = next;
  }
  return r;
}

double flow_solution(const DriftSpec& spec, double x0, double t) {
  require(x0 != 0.0, "flow_solution: x0 must be nonzero");
  require(t >= 0.0, "flow_solution: t must be >= 0");
  if (t == 0.0) {
    return x0;
  }
  const Side side = x0 > 0.0 ? Side::plus : Side::minus;
  const double r = time_primitive_inverse(spec, time_primitive(spec, x0) + t, side);
  return side == Side::plus ? r : -r;
}

double extremal_solution(const DriftSpec& spec, double t, Side side) {
  require(t >= 0.0, "extremal_solution: t must be >= 0");
  const double r = time_primitive_inverse(spec, t, side);
  return side == Side::plus ? r : -r;
}

}  // namespace levysel
