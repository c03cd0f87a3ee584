#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "levysel/ensemble.hpp"
#include "levysel/sde_engine.hpp"
#include "levysel/stats.hpp"

using namespace levysel;

namespace {

const DiffusionSpec kUnit = DiffusionSpec::constant_value(1.0);
const NoiseSpec kSymmetric = StableTailSpec{1.5, 1.0, 1.0};

SimConfig config(double dt, double horizon, double exit_level) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.exit_level = exit_level;
  return cfg;
}

double ode_error(double dt) {
  const DriftSpec d;
  RandomStream rng(1, 0);
  const auto path = simulate_path(d, kUnit, kSymmetric, 0.0, 1.0, config(dt, 2.0, 1e9), rng);
  double err = 0.0;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    err = std::max(err, std::abs(path.values[i] - flow_solution(d, 1.0, path.times[i])));
  }
  return err;
}

PathSample ramp(double dt, std::size_t n, double slope) {
  PathSample p;
  for (std::size_t k = 0; k <= n; ++k) {
    p.times.push_back(static_cast<double>(k) * dt);
    p.values.push_back(slope * static_cast<double>(k) * dt);
    p.noise_integral.push_back(0.0);
  }
  return p;
}

}  // namespace

TEST_CASE("zero noise from the origin stays at the origin") {
  RandomStream rng(2, 0);
  const auto path =
      simulate_path(DriftSpec{}, kUnit, kSymmetric, 0.0, 0.0, config(0.01, 5.0, 10.0), rng);
  CHECK_FALSE(path.exit);
  CHECK(path.values.size() == 501);
  for (const double v : path.values) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("zero noise solves the ODE with first-order error") {
  const double e1 = ode_error(0.01);
  const double e2 = ode_error(0.005);
  const double e3 = ode_error(0.0025);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 >= 1.7);
  CHECK(e1 / e2 <= 2.3);
  CHECK(e2 / e3 >= 1.7);
  CHECK(e2 / e3 <= 2.3);
}

TEST_CASE("identical streams give bit-identical paths") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 2.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  g.jumps_per_step = 3.0;
  const auto cfg = config(1e-3, 1.0, 100.0);
  RandomStream a(77, derive_stream_id(3, 9));
  RandomStream b(77, derive_stream_id(3, 9));
  const auto pa = simulate_path(DriftSpec{}, kUnit, g, 0.01, 0.0, cfg, a);
  const auto pb = simulate_path(DriftSpec{}, kUnit, g, 0.01, 0.0, cfg, b);
  CHECK(pa.values == pb.values);
  CHECK(pa.noise_integral == pb.noise_integral);
}

TEST_CASE("symmetric model: terminal value has zero mean") {
  const auto cfg = config(1e-3, 1.0, INFINITY);
  const PathSimulator sim = PathSimulator::macroscopic(DriftSpec{}, kUnit, kSymmetric, 0.01, cfg);
  const auto finals = run_ensemble<double>(10000, 1, [&](std::size_t i) {
    RandomStream rng(5, derive_stream_id(0, i));
    return sim.run(0.0, rng).values.back();
  });
  const auto m = mean_with_error(finals);
  CHECK(std::abs(m.mean) < 3.0 * m.std_error);
}

TEST_CASE("recording stride keeps the endpoints") {
  SimConfig cfg = config(0.01, 1.0, 1e9);
  cfg.record_stride = 7;
  RandomStream rng(3, 0);
  const auto path = simulate_path(DriftSpec{}, kUnit, kSymmetric, 0.1, 0.0, cfg, rng);
  CHECK(path.times.front() == 0.0);
  CHECK(path.times.back() == doctest::Approx(1.0));
  CHECK(path.times.size() == 100 / 7 + 2);
}

TEST_CASE("first exit on synthetic paths") {
  const auto up = ramp(0.1, 50, 1.0);
  const auto e = first_exit(up, 2.05);
  REQUIRE(e);
  CHECK(e->side == Side::plus);
  CHECK(e->time == doctest::Approx(2.1));

  const auto flat = ramp(0.1, 50, 0.0);
  CHECK_FALSE(first_exit(flat, 1.0));

  PathSample jump = ramp(0.1, 3, 0.0);
  jump.values[2] = -7.5;
  const auto j = first_exit(jump, 5.0);
  REQUIRE(j);
  CHECK(j->side == Side::minus);
  CHECK(j->value == -7.5);
  CHECK_THROWS_AS(first_exit(flat, 0.0), std::invalid_argument);
}

TEST_CASE("embedded exit agrees with first_exit") {
  const auto cfg = config(0.01, 50.0, 10.0);
  for (std::uint64_t i = 0; i < 50; ++i) {
    RandomStream rng(8, i);
    const auto path = simulate_path(DriftSpec{}, kUnit, kSymmetric, 1.0, 0.0, cfg, rng);
    const auto e = first_exit(path, cfg.exit_level);
    REQUIRE(path.exit.has_value() == e.has_value());
    if (e) {
      CHECK(e->side == path.exit->side);
      CHECK(e->time == path.exit->time);
      CHECK(e->value == path.exit->value);
    }
  }
}

TEST_CASE("step budget and blow-up errors") {
  SimConfig cfg = config(0.01, 10.0, 10.0);
  cfg.max_steps = 100;
  RandomStream rng(1, 0);
  CHECK_THROWS_AS(simulate_path(DriftSpec{}, kUnit, kSymmetric, 0.1, 0.0, cfg, rng),
                  StepBudgetError);
  CHECK_THROWS_AS(simulate_path(DriftSpec{}, kUnit, kSymmetric, 0.1, 1e308,
                                config(1e300, 1e301, INFINITY), rng),
                  NumericalBlowUpError);
  CHECK_THROWS_AS(config(0.0, 1.0, 1.0).validate(), std::invalid_argument);
}

TEST_CASE("noise growth statistic") {
  RandomStream rng(4, 0);
  const auto quiet =
      simulate_path(DriftSpec{}, kUnit, kSymmetric, 0.0, 0.5, config(0.01, 5.0, 1e9), rng);
  CHECK(noise_growth_statistic(quiet, 1.3, 0.1) == 0.0);

  PathSample p;
  for (int k = 0; k <= 40; ++k) {
    p.times.push_back(1.0 + 0.25 * k);
    p.values.push_back(0.0);
    p.noise_integral.push_back(std::sin(0.7 * k) * (1.0 + k));
  }
  double prev = INFINITY;
  for (const double delta : {0.05, 0.1, 0.2, 0.4}) {
    const double s = noise_growth_statistic(p, 1.5, delta);
    CHECK(s <= prev);
    prev = s;
  }
  CHECK_THROWS_AS(noise_growth_statistic(p, 2.5, 0.1), std::invalid_argument);
}

TEST_CASE("noise growth percentile is uniform in eps") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 1.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  g.jumps_per_step = 2.0;
  const auto cfg = config(0.01, 10.0, INFINITY);
  std::vector<double> p99;
  for (const double eps : {1e-1, 1e-2, 1e-3}) {
    const auto scales = solve_scales(eps, DriftSpec{}, NoiseSpec{g});
    const auto sim = PathSimulator::rescaled(DriftSpec{}, kUnit, g, scales, cfg);
    const auto stats = run_ensemble<double>(2000, 1, [&](std::size_t i) {
      RandomStream rng(6, derive_stream_id(static_cast<std::uint64_t>(-std::log10(eps)), i));
      return noise_growth_statistic(sim.run(0.0, rng), 1.3, 0.1);
    });
    p99.push_back(quantile(stats, 0.99));
  }
  for (const double q : p99) {
    CHECK(std::isfinite(q));
    CHECK(q < 3.0 * p99.front());
    CHECK(q > p99.front() / 3.0);
  }
}

TEST_CASE("rescaled and macroscopic runs agree in law") {
  const double eps = 0.01;
  const auto scales = solve_scales(eps, DriftSpec{}, kSymmetric);
  const SimConfig rescaled_cfg = config(0.01, 50.0, 10.0);
  SimConfig macro_cfg = rescaled_cfg;
  macro_cfg.dt *= scales.eps_prime;
  macro_cfg.horizon *= scales.eps_prime;
  macro_cfg.exit_level *= scales.eps_second;
  const auto macro = PathSimulator::macroscopic(DriftSpec{}, kUnit, kSymmetric, eps, macro_cfg);
  const auto resc = PathSimulator::rescaled(DriftSpec{}, kUnit, kSymmetric, scales, rescaled_cfg);
  const std::size_t n = 10000;
  const auto tx = run_ensemble<double>(n, 1, [&](std::size_t i) {
    RandomStream rng(10, derive_stream_id(1, i));
    const auto p = macro.run(0.0, rng);
    return p.exit ? p.exit->time / scales.eps_prime : INFINITY;
  });
  const auto ty = run_ensemble<double>(n, 1, [&](std::size_t i) {
    RandomStream rng(10, derive_stream_id(2, i));
    const auto p = resc.run(0.0, rng);
    return p.exit ? p.exit->time : INFINITY;
  });
  CHECK(ks_two_sample(tx, ty) < 0.02);
}

TEST_CASE("rescaled brownian noise has unit variance") {
  const auto bm = solve_scales(1e-3, DriftSpec{}, NoiseSpec{BrownianSpec{}});
  const auto zs = sample_rescaled_noise(BrownianSpec{}, bm, 1.0, 20000, 3, 0);
  const auto m = mean_with_error(zs);
  CHECK(std::abs(m.mean) < 4.0 * m.std_error);
  double var = 0.0;
  for (const double z : zs) var += z * z;
  CHECK(var / zs.size() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("path CSV layout") {
  std::ostringstream os;
  write_path_csv(os, ramp(0.5, 2, 1.0));
  CHECK(os.str() == "t,x,noise_integral\n0,0,0\n0.5,0.5,0\n1,1,0\n");
}
