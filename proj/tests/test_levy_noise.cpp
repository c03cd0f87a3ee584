#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "levysel/levy_noise.hpp"
#include "levysel/stats.hpp"

using namespace levysel;

namespace {

std::vector<double> draw_stable(const StableTailSpec& spec, double dt, std::size_t n,
                                std::uint64_t seed) {
  const StableSampler sampler(spec, dt);
  RandomStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& v : out) {
    v = sampler(rng);
  }
  return out;
}

double upper_fraction(const std::vector<double>& xs, double z) {
  return static_cast<double>(std::count_if(xs.begin(), xs.end(),
                                           [z](double x) { return x > z; })) /
         static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("stable marginal parameters") {
  const auto sym = stable_marginal_params({1.5, 1.0, 1.0});
  CHECK(sym.skewness == 0.0);
  // sigma^alpha = Gamma(-1/2) cos(3 pi / 4) * 2 = 2 sqrt(2 pi)
  CHECK(std::pow(sym.scale, 1.5) == doctest::Approx(5.013256549262001).epsilon(1e-13));
  CHECK(sym.scale == doctest::Approx(2.929183775123047).epsilon(1e-13));
  CHECK(stable_marginal_params({1.5, 1.0, 0.0}).skewness == 1.0);
  CHECK(stable_marginal_params({1.5, 0.0, 2.0}).skewness == -1.0);
  for (const double cp : {0.0, 0.3, 1.0, 2.5}) {
    for (const double cm : {0.2, 1.0, 4.0}) {
      const auto m = stable_marginal_params({1.7, cp, cm});
      CHECK(m.skewness * (cp + cm) == doctest::Approx(cp - cm).epsilon(1e-14));
    }
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(StableTailSpec({1.0, 1.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(StableTailSpec({1.5, 0.0, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(StableTailSpec({1.5, -1.0, 1.0}).validate(), std::invalid_argument);
  GeneralizedNoiseSpec g;
  g.truncation_m = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.truncation_m = INFINITY;
  g.slow_var_nu.rho = 0.5;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.slow_var_nu.rho = 3.0;
  g.truncation_m = 5.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("tail mass") {
  const auto t = tail_mass(StableTailSpec{1.5, 1.0, 0.0}, 4.0);
  CHECK(t.right == doctest::Approx(0.125));
  CHECK(t.left == 0.0);

  GeneralizedNoiseSpec g;
  g.tails = {1.5, 2.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  g.truncation_m = 5.0;
  const auto beyond = tail_mass(g, 6.0);
  CHECK(beyond.right == 0.0);
  CHECK(beyond.left == 0.0);
  CHECK(tail_mass(g, 5.0).right == 0.0);
  const auto at_one = tail_mass(g, 1.0);
  CHECK(at_one.right == doctest::Approx(2.0 * 1.05341302633666009).epsilon(1e-13));
  CHECK(at_one.left == doctest::Approx(1.05341302633666009).epsilon(1e-13));
  CHECK(tail_mass(g, 0.5).left == doctest::Approx(3.43044079798356564).epsilon(1e-13));
  CHECK_THROWS_AS(tail_mass(g, 0.0), std::invalid_argument);
}

TEST_CASE("mirrored specs swap the tails") {
  const NoiseSpec n = StableTailSpec{1.5, 2.0, 1.0};
  const auto m = std::get<StableTailSpec>(mirrored(n));
  CHECK(m.c_plus == 1.0);
  CHECK(m.c_minus == 2.0);
}

TEST_CASE("stable sampler: zero mean") {
  const auto xs = draw_stable({1.5, 1.0, 1.0}, 1.0, 1000000, 11);
  // Infinite variance: use the median-of-means standard error proxy from
  // batches instead of the sample variance.
  std::vector<double> batch;
  for (std::size_t b = 0; b < 1000; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
      s += xs[b * 1000 + i];
    }
    batch.push_back(s / 1000.0);
  }
  const auto m = mean_with_error(batch);
  CHECK(std::abs(m.mean) < 3.0 * m.std_error);
}

TEST_CASE("stable sampler: upper tail matches the exact marginal") {
  // Exact P(Z(1) > z) for alpha = 1.5, C+ = C- = 1 (numerical inversion of
  // the characteristic function).
  const auto xs = draw_stable({1.5, 1.0, 1.0}, 1.0, 1000000, 12);
  CHECK(upper_fraction(xs, 5.0) == doctest::Approx(0.13375082492779).epsilon(0.03));
  CHECK(upper_fraction(xs, 10.0) == doctest::Approx(0.04072313923193).epsilon(0.03));
  CHECK(upper_fraction(xs, 20.0) == doctest::Approx(0.01225460008619).epsilon(0.05));
}

TEST_CASE("stable sampler: tail law approaches C+ + C-") {
  const auto xs = draw_stable({1.5, 1.0, 1.0}, 1.0, 1000000, 13);
  std::vector<double> scaled;
  for (const double z : {5.0, 10.0, 20.0}) {
    const double two_sided = static_cast<double>(std::count_if(
                                 xs.begin(), xs.end(),
                                 [z](double x) { return std::abs(x) > z; })) /
                             static_cast<double>(xs.size());
    scaled.push_back(std::pow(z, 1.5) * two_sided);
  }
  CHECK(scaled[0] > scaled[1]);
  CHECK(scaled[1] > scaled[2]);
  CHECK(scaled[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("stable sampler: self-similarity") {
  const StableTailSpec spec{1.5, 2.0, 1.0};
  const auto big = draw_stable(spec, 4.0, 1000000, 21);
  auto unit = draw_stable(spec, 1.0, 1000000, 22);
  for (auto& v : unit) {
    v *= std::pow(4.0, 1.0 / 1.5);
  }
  CHECK(ks_two_sample(big, unit) < 0.005);
}

TEST_CASE("stable sampler: sum rule") {
  const StableTailSpec spec{1.5, 1.0, 0.5};
  const auto a = draw_stable(spec, 0.3, 100000, 31);
  const auto b = draw_stable(spec, 0.7, 100000, 32);
  const auto c = draw_stable(spec, 1.0, 100000, 33);
  std::vector<double> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum[i] = a[i] + b[i];
  }
  CHECK(ks_two_sample(sum, c) < 0.01);
}

TEST_CASE("generalized sampler: compensation and truncation") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 1.0, 1.0};
  g.small_jump_cutoff = 1e-2;
  const GeneralizedSampler sampler(g, 1e-3);
  RandomStream rng(41, 0);
  std::vector<double> xs(1000000);
  for (auto& v : xs) {
    v = sampler(rng);
  }
  const auto m = mean_with_error(xs);
  CHECK(std::abs(m.mean) < 3.0 * m.std_error);

  GeneralizedNoiseSpec wide = g;
  wide.small_jump_cutoff = 0.1;
  const GeneralizedSampler coarse(wide, 0.1);
  JumpTrace trace;
  for (int i = 0; i < 1000000; ++i) {
    coarse(rng, &trace);
  }
  CHECK(trace.n_jumps > 1000000);
  CHECK(trace.max_abs_jump <= 5.0);
  CHECK(trace.max_abs_jump > 4.0);
}

TEST_CASE("generalized sampler: mean drift") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 2.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  g.mean_drift = 0.3;
  g.jumps_per_step = 3.0;
  const GeneralizedSampler sampler(g, 0.5);
  RandomStream rng(42, 0);
  std::vector<double> xs(400000);
  for (auto& v : xs) {
    v = sampler(rng);
  }
  const auto m = mean_with_error(xs);
  CHECK(std::abs(m.mean - 0.15) < 3.0 * m.std_error);
}

TEST_CASE("generalized sampler: moments of the jump measure") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 2.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  g.small_jump_cutoff = 0.01;
  const GeneralizedSampler s(g, 1e-4);
  // (C+ - C-) int_r^M z nu(dz) and (C+ + C-) int_0^r z^2 nu(dz)
  CHECK(s.large_jump_mean_rate() == doctest::Approx(54.66176856765803705).epsilon(1e-9));
  CHECK(s.small_jump_variance_rate() == doctest::Approx(2.41125892085239998).epsilon(1e-9));

  GeneralizedNoiseSpec p;
  p.tails = {1.5, 2.0, 1.0};
  p.truncation_m = INFINITY;
  p.small_jump_cutoff = 0.01;
  const GeneralizedSampler ps(p, 1e-4);
  CHECK(ps.large_jump_mean_rate() == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("generalized sampler: inverse tail") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 2.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  const GeneralizedSampler s(g, 1e-3);
  for (const double z : {1e-4, 0.01, 0.5, 1.0, 4.9}) {
    const auto t = tail_mass(g, z);
    CHECK(s.inverse_tail(t.right + t.left) == doctest::Approx(z).epsilon(1e-10));
  }
}

TEST_CASE("generalized sampler: jump intensity above 1") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 1.0, 1.0};
  g.slow_var_nu.rho = 0.5;
  g.small_jump_cutoff = 0.1;
  const double dt = 0.01;
  const GeneralizedSampler sampler(g, dt);
  RandomStream rng(43, 0);
  JumpTrace trace;
  trace.count_level = 1.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    sampler(rng, &trace);
  }
  const double rate = static_cast<double>(trace.n_above_level) / (n * dt);
  CHECK(rate == doctest::Approx(1.05341302633666009).epsilon(0.05));
}

TEST_CASE("generalized sampler: adaptive cutoff and jump budget") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 1.0, 1.0};
  g.jumps_per_step = 4.0;
  const GeneralizedSampler s(g, 0.01);
  CHECK(s.expected_jumps() == doctest::Approx(4.0));
  CHECK(tail_mass(g, s.cutoff()).right * 2.0 * 0.01 == doctest::Approx(4.0).epsilon(1e-10));

  GeneralizedNoiseSpec tight;
  tight.tails = {1.5, 1.0, 1.0};
  tight.max_jumps_per_step = 10.0;
  CHECK_THROWS_AS(GeneralizedSampler(tight, 1.0), JumpBudgetError);
}

TEST_CASE("generalized noise with stable tails reproduces the stable law") {
  GeneralizedNoiseSpec g;
  g.tails = {1.5, 2.0, 1.0};
  g.truncation_m = INFINITY;
  g.jumps_per_step = 50.0;
  const GeneralizedSampler series(g, 1.0);
  RandomStream rng(44, 0);
  std::vector<double> a(100000);
  for (auto& v : a) {
    v = series(rng);
  }
  const auto b = draw_stable(g.tails, 1.0, 100000, 45);
  CHECK(ks_two_sample(a, b) < 0.01);
}

TEST_CASE("increment sampler dispatch") {
  RandomStream r1(5, 1);
  RandomStream r2(5, 1);
  const IncrementSampler inc(NoiseSpec{StableTailSpec{1.5, 1.0, 1.0}}, 0.1);
  const StableSampler direct({1.5, 1.0, 1.0}, 0.1);
  CHECK(inc(r1) == direct(r2));
  const IncrementSampler bm(NoiseSpec{BrownianSpec{}}, 0.25);
  RandomStream r3(5, 2);
  RandomStream r4(5, 2);
  CHECK(bm(r3) == doctest::Approx(0.5 * r4.normal()));
  CHECK(noise_alpha(NoiseSpec{BrownianSpec{}}) == 2.0);
}
