#include <doctest.h>

#include <cmath>
#include <vector>

#include "levysel/selection_mc.hpp"

using namespace levysel;

namespace {

SelectionModel stable_model(double c_plus, double c_minus, double a_plus = 1.0,
                            double a_minus = 1.0) {
  SelectionModel m;
  m.drift.a_plus = a_plus;
  m.drift.a_minus = a_minus;
  m.noise = StableTailSpec{1.5, c_plus, c_minus};
  return m;
}

SimConfig rescaled_config(double dt = 0.01, double horizon = 50.0, double level = 10.0) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.exit_level = level;
  return cfg;
}

PathSample ramp(double slope) {
  PathSample p;
  for (int k = 0; k <= 100; ++k) {
    p.times.push_back(0.1 * k);
    p.values.push_back(slope * 0.1 * k);
    p.noise_integral.push_back(0.0);
  }
  return p;
}

}  // namespace

TEST_CASE("classification of synthetic paths") {
  CHECK(classify_path(ramp(2.0), 10.0) == Selection::plus);
  CHECK(classify_path(ramp(-2.0), 10.0) == Selection::minus);
  CHECK(classify_path(ramp(0.0), 10.0) == Selection::undecided);
  CHECK(std::string(to_string(Selection::undecided)) == "undecided");
}

TEST_CASE("gaussian reference formula") {
  const auto sym = gaussian_reference(0.5, 3.0, 3.0);
  CHECK(sym.p_minus == doctest::Approx(0.5));
  CHECK(sym.p_plus == doctest::Approx(0.5));
  const auto r = gaussian_reference(0.5, 8.0, 1.0);
  CHECK(r.p_minus == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(r.p_plus == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r.p_minus + r.p_plus == 1.0);
  double prev = 1.0;
  for (const double ap : {0.25, 0.5, 1.0, 2.0, 4.0, 16.0}) {
    const double pm = gaussian_reference(0.3, ap, 1.0).p_minus;
    CHECK(pm < prev);
    prev = pm;
  }
  CHECK_THROWS_AS(gaussian_reference(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_reference(0.5, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("estimate bookkeeping") {
  SelectionEstimate e;
  e.n_total = 100;
  e.n_plus = 30;
  e.n_minus = 60;
  e.n_undecided = 10;
  e.finalize();
  CHECK(e.p_plus_hat == doctest::Approx(1.0 / 3.0));
  CHECK(e.p_plus_hat + e.p_minus_hat == 1.0);
  CHECK(e.undecided_fraction() == doctest::Approx(0.1));
  CHECK_FALSE(e.valid);
  SelectionEstimate more = e;
  more.n_plus = 60;
  more.n_undecided = 0;
  more.n_total = 120;
  e.merge(more);
  CHECK(e.n_total == 220);
  CHECK(e.n_plus + e.n_minus + e.n_undecided == e.n_total);
  CHECK(e.valid);
}

TEST_CASE("symmetric model selects both sides equally") {
  RunOptions opts;
  opts.seed = 101;
  const auto e = estimate_selection(stable_model(1.0, 1.0), 0.01, 10000, rescaled_config(), opts);
  CHECK(e.n_plus + e.n_minus + e.n_undecided == e.n_total);
  CHECK(e.p_plus_hat >= 0.48);
  CHECK(e.p_plus_hat <= 0.52);
  CHECK(e.valid);
}

TEST_CASE("estimates do not depend on the worker count") {
  RunOptions one;
  one.seed = 5;
  RunOptions three = one;
  three.workers = 3;
  const auto spec = stable_model(2.0, 1.0);
  const auto a = estimate_selection(spec, 0.1, 600, rescaled_config(), one);
  const auto b = estimate_selection(spec, 0.1, 600, rescaled_config(), three);
  CHECK(a.n_plus == b.n_plus);
  CHECK(a.n_minus == b.n_minus);
  CHECK(a.n_undecided == b.n_undecided);
}

TEST_CASE("estimate preconditions") {
  RunOptions opts;
  CHECK_THROWS_AS(estimate_selection(stable_model(1.0, 1.0), 0.01, 99, rescaled_config(), opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_selection(stable_model(1.0, 1.0), 0.0, 100, rescaled_config(), opts),
                  std::invalid_argument);
}

TEST_CASE("pure power scales make the rescaled equation eps-free") {
  RunOptions opts;
  opts.seed = 17;
  const auto spec = stable_model(2.0, 1.0);
  const auto a = estimate_selection(spec, 0.1, 10000, rescaled_config(), opts);
  opts.experiment_index = 1;
  const auto b = estimate_selection(spec, 1e-4, 10000, rescaled_config(), opts);
  CHECK(agree_within_ci(a, b));
}

TEST_CASE("mirror symmetry") {
  RunOptions opts;
  opts.seed = 23;
  const auto spec = stable_model(2.0, 1.0, 1.5, 1.0);
  const auto a = estimate_selection(spec, 0.01, 10000, rescaled_config(), opts);
  opts.experiment_index = 1;
  const auto b = estimate_selection(spec.mirrored(), 0.01, 10000, rescaled_config(), opts);
  CHECK(std::abs(a.p_plus_hat - b.p_minus_hat) < a.ci_half_width + b.ci_half_width);
}

TEST_CASE("p+ responds monotonically to C+") {
  // p+ falls as C+ grows.
  RunOptions opts;
  opts.seed = 41;
  const SimConfig cfg = rescaled_config(0.01, 200.0, 1000.0);
  std::vector<SelectionEstimate> est;
  for (const double c_plus : {0.5, 1.0, 2.0}) {
    est.push_back(estimate_selection(stable_model(c_plus, 1.0), 0.01, 4000, cfg, opts));
    ++opts.experiment_index;
  }
  for (std::size_t i = 1; i < est.size(); ++i) {
    CAPTURE(i);
    CHECK(est[i].p_plus_hat < est[i - 1].p_plus_hat);
    CHECK(est[i].p_plus_hat - est[i - 1].p_plus_hat <
          -(est[i].ci_half_width + est[i - 1].ci_half_width) / 2.0);
  }
}

TEST_CASE("gaussian oracle for other exponents") {
  struct Triple {
    double beta, a_plus, a_minus;
  };
  RunOptions opts;
  opts.seed = 31;
  for (const Triple t : {Triple{0.3, 2.0, 1.0}, Triple{0.7, 1.0, 3.0}}) {
    SelectionModel m;
    m.drift.beta = t.beta;
    m.drift.a_plus = t.a_plus;
    m.drift.a_minus = t.a_minus;
    m.noise = BrownianSpec{};
    const auto e = estimate_selection(m, 0.01, 10000, rescaled_config(1e-3), opts);
    const double ref = gaussian_reference(t.beta, t.a_plus, t.a_minus).p_plus;
    CAPTURE(t.beta);
    CAPTURE(e.p_plus_hat);
    CHECK(ref >= e.ci.lower);
    CHECK(ref <= e.ci.upper);
    ++opts.experiment_index;
  }
}

TEST_CASE("undecided fraction shrinks as the horizon grows") {
  RunOptions opts;
  opts.seed = 41;
  double prev = 1.0;
  for (const double horizon : {1.0, 2.0, 4.0, 8.0}) {
    const auto e =
        estimate_selection(stable_model(1.0, 1.0), 0.01, 2000, rescaled_config(0.01, horizon), opts);
    CHECK(e.undecided_fraction() < prev);
    prev = e.undecided_fraction();
  }
  CHECK(prev < 0.05);
}

TEST_CASE("repeated seeds: CI overlap calibration") {
  int agree = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    RunOptions a;
    a.seed = 1000 + 2 * t;
    RunOptions b;
    b.seed = 1001 + 2 * t;
    const auto ea = estimate_selection(stable_model(2.0, 1.0), 0.1, 500, rescaled_config(), a);
    const auto eb = estimate_selection(stable_model(2.0, 1.0), 0.1, 500, rescaled_config(), b);
    agree += agree_within_ci(ea, eb);
  }
  CHECK(agree >= 0.95 * trials);
}

TEST_CASE("model limit of a generalized spec") {
  SelectionModel g;
  g.drift.a_plus = 2.0;
  g.drift.perturb_plus = Perturbation::parse("power:1,0.3");
  g.drift.slow_var_l.rho = 0.5;
  g.diffusion = DiffusionSpec::parse("rational:1.5,0.5");
  GeneralizedNoiseSpec n;
  n.tails = {1.6, 2.0, 1.0};
  n.slow_var_nu.rho = 0.5;
  g.noise = n;
  const auto m = model_limit(g);
  CHECK(m.drift.is_model());
  CHECK(m.drift.a_plus == 2.0);
  CHECK(m.diffusion.is_constant());
  CHECK(m.diffusion(3.0) == 1.5);
  CHECK(std::get<StableTailSpec>(m.noise) == n.tails);
}

TEST_CASE("robustness: identical specs pass") {
  RunOptions opts;
  opts.seed = 51;
  const auto spec = stable_model(2.0, 1.0);
  const std::vector<double> grid{0.1, 0.01};
  const auto r = robustness_experiment(spec, spec, grid, 2000, rescaled_config(), opts);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].eps == 0.1);
  CHECK(r.verdict);
  CHECK(r.monotone_shrink);
  const auto other = stable_model(1.0, 1.0);
  CHECK_THROWS_AS(robustness_experiment(spec, other, grid, 2000, rescaled_config(), opts),
                  std::invalid_argument);
}

TEST_CASE("eps invariance preconditions and symmetric case") {
  RunOptions opts;
  const std::vector<double> single{0.1};
  CHECK_THROWS_AS(eps_invariance_check(stable_model(1.0, 1.0), single, 1000,
                                       rescaled_config(), opts),
                  std::invalid_argument);
  const std::vector<double> narrow{0.1, 0.05, 0.02};
  CHECK_THROWS_AS(eps_invariance_check(stable_model(1.0, 1.0), narrow, 1000,
                                       rescaled_config(), opts),
                  std::invalid_argument);
  const std::vector<double> grid{1.0, 0.1, 0.01};
  const auto r = eps_invariance_check(stable_model(1.0, 1.0), grid, 4000, rescaled_config(), opts);
  CHECK(r.pass);
  for (const auto& e : r.estimates) {
    CHECK(std::abs(e.p_plus_hat - 0.5) < e.ci_half_width);
  }
}

TEST_CASE("tube distance and tube split") {
  const DriftSpec d;
  PathSample on_x_plus;
  for (int k = 0; k <= 20; ++k) {
    const double t = 0.05 * k;
    on_x_plus.times.push_back(t);
    on_x_plus.values.push_back(extremal_solution(d, t, Side::plus));
    on_x_plus.noise_integral.push_back(0.0);
  }
  CHECK(sup_distance_to_extremal(on_x_plus, d, Side::plus) == 0.0);
  CHECK(sup_distance_to_extremal(on_x_plus, d, Side::minus) > 0.0);

  RunOptions opts;
  opts.seed = 61;
  TubeConfig tube;
  tube.horizon = 3.0;
  tube.dt = 3e-3;
  const std::vector<double> grid{1e-1, 1e-3};
  const auto rows = tube_convergence(stable_model(1.0, 1.0), grid, tube, 400, opts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].inside_fraction() >= rows[0].inside_fraction());
  CHECK(rows[1].inside_fraction() > 0.9);
  CHECK(tube_fraction_nondecreasing(rows));
  CHECK(rows[1].delta == doctest::Approx(0.1 * 2.25));
}

TEST_CASE("exit box") {
  RunOptions opts;
  opts.seed = 71;
  const std::vector<double> grid{1e-1, 1e-2};
  const auto rows =
      exit_box_experiment(stable_model(1.0, 1.0), grid, 10.0, 50.0, 500, rescaled_config(), opts);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.exit_fraction() >= 0.95);
  }
  CHECK_THROWS_AS(exit_box_experiment(stable_model(1.0, 1.0), grid, 0.0, 50.0, 500,
                                      rescaled_config(), opts),
                  std::invalid_argument);
}
