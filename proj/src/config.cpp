#include "levysel/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace levysel {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& field) {
  const std::string text = trim(raw);
  if (text == "inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) {
    throw ConfigParseError(field + ": expected a number, got '" + raw + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& raw, const std::string& field) {
  const std::string text = trim(raw);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigParseError(field + ": expected a nonnegative integer, got '" + raw + "'");
  }
  return value;
}

bool parse_bool(const std::string& raw, const std::string& field) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    return false;
  }
  throw ConfigParseError(field + ": expected true or false, got '" + raw + "'");
}

std::string format_double(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += format_double(xs[i]);
  }
  return out;
}

/// Parameters of the noise block before the variant is chosen.
struct NoiseFields {
  std::string kind = "stable";
  GeneralizedNoiseSpec g;
};

NoiseSpec make_noise(const NoiseFields& f) {
  if (f.kind == "stable") {
    return f.g.tails;
  }
  if (f.kind == "generalized") {
    return f.g;
  }
  if (f.kind == "brownian") {
    return BrownianSpec{};
  }
  throw ConfigParseError("noise.kind: expected stable, generalized or brownian, got '" +
                         f.kind + "'");
}

struct Builder {
  ExperimentConfig cfg;
  NoiseFields noise;
};

using Setter = std::function<void(Builder&, const std::string&, const std::string&)>;

template <class F>
Setter number(F f) {
  return [f](Builder& b, const std::string& v, const std::string& key) {
    f(b, parse_double(v, key));
  };
}

template <class F>
Setter count(F f) {
  return [f](Builder& b, const std::string& v, const std::string& key) {
    f(b, parse_unsigned(v, key));
  };
}

template <class F>
Setter text(F f) {
  return [f](Builder& b, const std::string& v, const std::string& key) {
    try {
      f(b, trim(v));
    } catch (const std::invalid_argument& e) {
      throw ConfigParseError(key + ": " + e.what());
    }
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"experiment.kind",
       text([](Builder& b, const std::string& v) { b.cfg.kind = parse_experiment_kind(v); })},
      {"experiment.name", text([](Builder& b, const std::string& v) { b.cfg.name = v; })},
      {"experiment.eps", number([](Builder& b, double v) { b.cfg.eps = v; })},
      {"experiment.eps_grid",
       [](Builder& b, const std::string& v, const std::string& key) {
         b.cfg.eps_grid = parse_double_list(v, key);
       }},
      {"experiment.n_paths", count([](Builder& b, std::uint64_t v) { b.cfg.n_paths = v; })},
      {"experiment.seed", count([](Builder& b, std::uint64_t v) { b.cfg.seed = v; })},
      {"experiment.workers", count([](Builder& b, std::uint64_t v) { b.cfg.workers = v; })},

      {"noise.kind", text([](Builder& b, const std::string& v) { b.noise.kind = v; })},
      {"noise.alpha", number([](Builder& b, double v) { b.noise.g.tails.alpha = v; })},
      {"noise.c_plus", number([](Builder& b, double v) { b.noise.g.tails.c_plus = v; })},
      {"noise.c_minus", number([](Builder& b, double v) { b.noise.g.tails.c_minus = v; })},
      {"noise.l_nu_c", number([](Builder& b, double v) { b.noise.g.slow_var_nu.c = v; })},
      {"noise.l_nu_rho", number([](Builder& b, double v) { b.noise.g.slow_var_nu.rho = v; })},
      {"noise.truncation", number([](Builder& b, double v) { b.noise.g.truncation_m = v; })},
      {"noise.mean_drift", number([](Builder& b, double v) { b.noise.g.mean_drift = v; })},
      {"noise.small_jump_cutoff",
       number([](Builder& b, double v) { b.noise.g.small_jump_cutoff = v; })},
      {"noise.jumps_per_step",
       number([](Builder& b, double v) { b.noise.g.jumps_per_step = v; })},
      {"noise.max_jumps_per_step",
       number([](Builder& b, double v) { b.noise.g.max_jumps_per_step = v; })},

      {"drift.beta", number([](Builder& b, double v) { b.cfg.spec.drift.beta = v; })},
      {"drift.a_plus", number([](Builder& b, double v) { b.cfg.spec.drift.a_plus = v; })},
      {"drift.a_minus", number([](Builder& b, double v) { b.cfg.spec.drift.a_minus = v; })},
      {"drift.perturb_plus", text([](Builder& b, const std::string& v) {
         b.cfg.spec.drift.perturb_plus = Perturbation::parse(v);
       })},
      {"drift.perturb_minus", text([](Builder& b, const std::string& v) {
         b.cfg.spec.drift.perturb_minus = Perturbation::parse(v);
       })},
      {"drift.l_c", number([](Builder& b, double v) { b.cfg.spec.drift.slow_var_l.c = v; })},
      {"drift.l_rho",
       number([](Builder& b, double v) { b.cfg.spec.drift.slow_var_l.rho = v; })},
      {"drift.trunc_at_one",
       [](Builder& b, const std::string& v, const std::string& key) {
         b.cfg.spec.drift.trunc_at_one = parse_bool(v, key);
       }},

      {"diffusion.b", text([](Builder& b, const std::string& v) {
         b.cfg.spec.diffusion = DiffusionSpec::parse(v);
       })},

      {"sim.dt", number([](Builder& b, double v) { b.cfg.sim.dt = v; })},
      {"sim.horizon", number([](Builder& b, double v) { b.cfg.sim.horizon = v; })},
      {"sim.exit_level", number([](Builder& b, double v) { b.cfg.sim.exit_level = v; })},
      {"sim.record_stride",
       count([](Builder& b, std::uint64_t v) { b.cfg.sim.record_stride = v; })},
      {"sim.max_steps", count([](Builder& b, std::uint64_t v) { b.cfg.sim.max_steps = v; })},
      {"sim.x0", number([](Builder& b, double v) { b.cfg.x0 = v; })},
      {"sim.frame", text([](Builder& b, const std::string& v) {
         if (v != "rescaled" && v != "macroscopic") {
           throw std::invalid_argument("expected rescaled or macroscopic, got '" + v + "'");
         }
         b.cfg.rescaled_frame = v == "rescaled";
       })},

      {"tube.horizon", number([](Builder& b, double v) { b.cfg.tube.horizon = v; })},
      {"tube.dt", number([](Builder& b, double v) { b.cfg.tube.dt = v; })},
      {"tube.delta_fraction",
       number([](Builder& b, double v) { b.cfg.tube.delta_fraction = v; })},
      {"tube.exit_level", number([](Builder& b, double v) { b.cfg.tube.exit_level = v; })},

      {"tails.z_grid",
       [](Builder& b, const std::string& v, const std::string& key) {
         b.cfg.z_grid = parse_double_list(v, key);
       }},
      {"tails.bound_constant", number([](Builder& b, double v) { b.cfg.bound_constant = v; })},
      {"tails.bound_delta", number([](Builder& b, double v) { b.cfg.bound_delta = v; })},

      {"scales.tol", number([](Builder& b, double v) { b.cfg.scales_tol = v; })},

      {"exitbox.r", number([](Builder& b, double v) { b.cfg.box_r = v; })},
      {"exitbox.t0", number([](Builder& b, double v) { b.cfg.box_t0 = v; })},

      {"output.dir", text([](Builder& b, const std::string& v) { b.cfg.out_dir = v; })},
      {"output.format", text([](Builder& b, const std::string& v) {
         if (v == "csv") {
           b.cfg.format = ReportFormat::csv;
         } else if (v == "json") {
           b.cfg.format = ReportFormat::json;
         } else {
           throw std::invalid_argument("expected csv or json, got '" + v + "'");
         }
       })},
      {"output.dump_paths", count([](Builder& b, std::uint64_t v) { b.cfg.dump_paths = v; })},
  };
  return table;
}

void check(bool ok, const std::string& field, const std::string& message) {
  if (!ok) {
    throw ConfigValidationError(field, field + " " + message);
  }
}

/// Maps spec-level invalid_argument messages ("drift.beta must ...") to a
/// validation error carrying the field path.
template <class F>
void forward_validation(F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto end = msg.find_first_of(" :");
    throw ConfigValidationError(msg.substr(0, end), msg);
  }
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate:
      return "simulate";
    case ExperimentKind::estimate:
      return "estimate";
    case ExperimentKind::robustness:
      return "robustness";
    case ExperimentKind::eps_invariance:
      return "eps-invariance";
    case ExperimentKind::tube:
      return "tube";
    case ExperimentKind::scales:
      return "scales";
    case ExperimentKind::tails:
      return "tails";
    case ExperimentKind::gaussian_oracle:
      return "gaussian-oracle";
    case ExperimentKind::exit_box:
      return "exit-box";
  }
  return "estimate";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (const auto k :
       {ExperimentKind::simulate, ExperimentKind::estimate, ExperimentKind::robustness,
        ExperimentKind::eps_invariance, ExperimentKind::tube, ExperimentKind::scales,
        ExperimentKind::tails, ExperimentKind::gaussian_oracle, ExperimentKind::exit_box}) {
    if (text == to_string(k)) {
      return k;
    }
  }
  throw std::invalid_argument("unknown experiment kind '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(item, field));
  }
  if (out.empty()) {
    throw ConfigParseError(field + ": expected a comma-separated list of numbers");
  }
  return out;
}

ConfigEntries read_config_string(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigParseError(e.what());
  }
  ConfigEntries entries;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigParseError("key '" + section + "' outside of a section");
    }
    for (const auto& [key, value] : body) {
      entries[section + "." + key] = value.data();
    }
  }
  return entries;
}

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigParseError("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return read_config_string(buf.str());
  } catch (const ConfigParseError& e) {
    throw ConfigParseError(path + ": " + e.what());
  }
}

void apply_overrides(ConfigEntries& entries, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const std::string key = trim(o.substr(0, eq));
    if (eq == std::string::npos || key.find('.') == std::string::npos) {
      throw ConfigParseError("override '" + o + "' is not of the form section.key=value");
    }
    entries[key] = trim(o.substr(eq + 1));
  }
}

ExperimentConfig build_config(const ConfigEntries& entries) {
  Builder b;
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigParseError("unknown config key '" + key + "'");
    }
    it->second(b, value, key);
  }
  b.cfg.spec.noise = make_noise(b.noise);
  b.cfg.validate();
  return b.cfg;
}

void ExperimentConfig::validate() const {
  check(eps > 0.0 && eps <= 1.0, "experiment.eps", "must lie in (0, 1]");
  check(!eps_grid.empty(), "experiment.eps_grid", "must not be empty");
  for (const double e : eps_grid) {
    check(e > 0.0 && e <= 1.0, "experiment.eps_grid", "entries must lie in (0, 1]");
  }
  check(n_paths >= 1, "experiment.n_paths", "must be positive");
  const bool estimating = kind == ExperimentKind::estimate ||
                          kind == ExperimentKind::robustness ||
                          kind == ExperimentKind::eps_invariance ||
                          kind == ExperimentKind::gaussian_oracle ||
                          kind == ExperimentKind::exit_box;
  check(!estimating || n_paths >= 100, "experiment.n_paths", "must be >= 100 for estimates");
  check(workers >= 1, "experiment.workers", "must be >= 1");
  forward_validation([&] { spec.validate(); });
  forward_validation([&] { sim.validate(); });
  check(std::isfinite(x0), "sim.x0", "must be finite");
  forward_validation([&] { tube.validate(); });
  check(!z_grid.empty(), "tails.z_grid", "must not be empty");
  for (const double z : z_grid) {
    check(z > 0.0, "tails.z_grid", "entries must be positive");
  }
  check(bound_constant >= 0.0, "tails.bound_constant", "must be >= 0");
  check(bound_delta >= 0.0, "tails.bound_delta", "must be >= 0");
  check(scales_tol > 0.0, "scales.tol", "must be positive");
  check(box_r > 0.0, "exitbox.r", "must be positive");
  check(box_t0 > 0.0, "exitbox.t0", "must be positive");
  if (kind == ExperimentKind::eps_invariance) {
    double lo = eps_grid.front();
    double hi = eps_grid.front();
    for (const double e : eps_grid) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    check(eps_grid.size() >= 3 && std::log10(hi / lo) >= 2.0 - 1e-9, "experiment.eps_grid",
          "needs at least 3 values spanning 2 decades");
  }
}

ConfigEntries resolved_entries(const ExperimentConfig& cfg) {
  ConfigEntries e;
  e["experiment.kind"] = to_string(cfg.kind);
  e["experiment.name"] = cfg.name;
  e["experiment.eps"] = format_double(cfg.eps);
  e["experiment.eps_grid"] = format_list(cfg.eps_grid);
  e["experiment.n_paths"] = std::to_string(cfg.n_paths);
  e["experiment.seed"] = std::to_string(cfg.seed);
  e["experiment.workers"] = std::to_string(cfg.workers);

  GeneralizedNoiseSpec g;
  std::string kind = "stable";
  if (const auto* s = std::get_if<StableTailSpec>(&cfg.spec.noise)) {
    g.tails = *s;
  } else if (const auto* gs = std::get_if<GeneralizedNoiseSpec>(&cfg.spec.noise)) {
    g = *gs;
    kind = "generalized";
  } else {
    kind = "brownian";
  }
  e["noise.kind"] = kind;
  e["noise.alpha"] = format_double(g.tails.alpha);
  e["noise.c_plus"] = format_double(g.tails.c_plus);
  e["noise.c_minus"] = format_double(g.tails.c_minus);
  e["noise.l_nu_c"] = format_double(g.slow_var_nu.c);
  e["noise.l_nu_rho"] = format_double(g.slow_var_nu.rho);
  e["noise.truncation"] = format_double(g.truncation_m);
  e["noise.mean_drift"] = format_double(g.mean_drift);
  e["noise.small_jump_cutoff"] = format_double(g.small_jump_cutoff);
  e["noise.jumps_per_step"] = format_double(g.jumps_per_step);
  e["noise.max_jumps_per_step"] = format_double(g.max_jumps_per_step);

  const DriftSpec& d = cfg.spec.drift;
  e["drift.beta"] = format_double(d.beta);
  e["drift.a_plus"] = format_double(d.a_plus);
  e["drift.a_minus"] = format_double(d.a_minus);
  e["drift.perturb_plus"] = d.perturb_plus.to_string();
  e["drift.perturb_minus"] = d.perturb_minus.to_string();
  e["drift.l_c"] = format_double(d.slow_var_l.c);
  e["drift.l_rho"] = format_double(d.slow_var_l.rho);
  e["drift.trunc_at_one"] = d.trunc_at_one ? "true" : "false";
  e["diffusion.b"] = cfg.spec.diffusion.to_string();

  e["sim.dt"] = format_double(cfg.sim.dt);
  e["sim.horizon"] = format_double(cfg.sim.horizon);
  e["sim.exit_level"] = format_double(cfg.sim.exit_level);
  e["sim.record_stride"] = std::to_string(cfg.sim.record_stride);
  e["sim.max_steps"] = std::to_string(cfg.sim.max_steps);
  e["sim.x0"] = format_double(cfg.x0);
  e["sim.frame"] = cfg.rescaled_frame ? "rescaled" : "macroscopic";

  e["tube.horizon"] = format_double(cfg.tube.horizon);
  e["tube.dt"] = format_double(cfg.tube.dt);
  e["tube.delta_fraction"] = format_double(cfg.tube.delta_fraction);
  e["tube.exit_level"] = format_double(cfg.tube.exit_level);

  e["tails.z_grid"] = format_list(cfg.z_grid);
  e["tails.bound_constant"] = format_double(cfg.bound_constant);
  e["tails.bound_delta"] = format_double(cfg.bound_delta);
  e["scales.tol"] = format_double(cfg.scales_tol);
  e["exitbox.r"] = format_double(cfg.box_r);
  e["exitbox.t0"] = format_double(cfg.box_t0);

  e["output.dir"] = cfg.out_dir;
  e["output.format"] = cfg.format == ReportFormat::csv ? "csv" : "json";
  e["output.dump_paths"] = std::to_string(cfg.dump_paths);
  return e;
}

}  // namespace levysel
