#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "levysel/rng.hpp"
#include "levysel/stats.hpp"

using namespace levysel;

TEST_CASE("wilson interval reference values") {
  struct Row {
    double s, n, lo, hi;
  };
  const Row rows[] = {
      {8000, 10000, 0.7920456034485616, 0.8077239975290326},
      {0, 10, 0.0, 0.27753279986288926},
      {10, 10, 0.7224672001371106, 1.0},
      {37, 100, 0.2818236053432453, 0.46779470419057095},
      {1, 3, 0.06149194472039626, 0.7923403991979523},
  };
  for (const Row& r : rows) {
    const auto ci = wilson_interval(r.s, r.n);
    CHECK(ci.lower == doctest::Approx(r.lo).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(r.hi).epsilon(1e-12));
  }
  CHECK(wilson_interval(0, 0).half_width() == 0.5);
  CHECK_THROWS_AS(wilson_interval(5, 3), std::invalid_argument);
}

TEST_CASE("two-sample KS statistic on small samples") {
  const std::vector<double> a{0.1, 0.5, 0.9, 1.3, 2.0};
  const std::vector<double> b{0.2, 0.5, 0.6, 3.0};
  CHECK(ks_two_sample(a, b) == doctest::Approx(0.35));
  const std::vector<double> c{1, 2, 2, 3};
  const std::vector<double> d{2, 2, 4};
  CHECK(ks_two_sample(c, d) == doctest::Approx(1.0 / 3.0));
  CHECK(ks_two_sample(a, a) == 0.0);
}

TEST_CASE("KS p-value follows the Kolmogorov distribution") {
  // lambda = 1 and 1.36 for very large samples
  const std::size_t n = 100000000;
  const double scale = std::sqrt(n / 2.0);
  CHECK(ks_p_value(1.0 / scale, n, n) == doctest::Approx(0.26999967167735456).epsilon(1e-3));
  CHECK(ks_p_value(1.36 / scale, n, n) ==
        doctest::Approx(0.049485876755377876).epsilon(1e-3));
}

TEST_CASE("KS statistic of two samples from one law is small") {
  RandomStream rng(9, 0);
  std::vector<double> a(20000);
  std::vector<double> b(20000);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  CHECK(ks_p_value(ks_two_sample(a, b), a.size(), b.size()) > 0.001);
}

TEST_CASE("quantile and mean helpers") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({3.0, 1.0, 2.0}, 1.0) == 3.0);
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = mean_with_error(v);
  CHECK(m.mean == 2.5);
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
