#include <doctest.h>

#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/stats.hpp"

using namespace rsos;

TEST_SUITE("stats") {

TEST_CASE("moments and quantiles") {
  const std::vector<double> xs{1, 2, 3, 4};
  CHECK(mean(xs) == 2.5);
  CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK(median(xs) == 2.5);
  CHECK(quantile(xs, 0.0) == 1.0);
  CHECK(quantile(xs, 1.0) == 4.0);
  CHECK(quantile(xs, 0.25) == doctest::Approx(1.75));
  CHECK(variance(std::vector<double>{7.0}) == 0.0);
  CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), Error);
}

TEST_CASE("bootstrap is deterministic and covers the mean") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(3.0, 1.0);
  std::vector<double> xs(500);
  for (auto& x : xs) x = n(rng);
  const auto a = summarize(xs, 0.95, 7);
  const auto b = summarize(xs, 0.95, 7);
  CHECK(a.mean_ci.lo == b.mean_ci.lo);
  CHECK(a.mean_ci.hi == b.mean_ci.hi);
  CHECK(a.mean_ci.lo < a.mean);
  CHECK(a.mean < a.mean_ci.hi);
  CHECK(a.mean_ci.hi - a.mean_ci.lo == doctest::Approx(2 * 1.96 / std::sqrt(500.0)).epsilon(0.2));
  CHECK_THROWS_AS(bootstrap_ci(xs, [](std::span<const double> v) { return mean(v); }, 1.5, 1), Error);
}

TEST_CASE("DKW epsilon") {
  CHECK(dkw_epsilon(0.01, 10000) == doctest::Approx(std::sqrt(std::log(200.0) / 20000.0)));
  CHECK(dkw_epsilon(0.01, 40000) == doctest::Approx(dkw_epsilon(0.01, 10000) / 2.0));
  CHECK_THROWS_AS(dkw_epsilon(0.0, 10), Error);
}

TEST_CASE("two-sample KS") {
  std::mt19937_64 rng(2);
  std::poisson_distribution<int> pois(6.0);
  std::vector<double> a(10000);
  for (auto& x : a) x = pois(rng);
  const auto same = ks_two_sample(a, a);
  CHECK(same.d == 0.0);
  CHECK(same.within_band());
  std::vector<double> shifted = a;
  for (auto& x : shifted) x += 1.0;
  const auto sh = ks_two_sample(a, shifted);
  CHECK(sh.d > 0.1);
  CHECK_FALSE(sh.within_band());
  CHECK(sh.p_asymptotic < 1e-6);
  CHECK_THROWS_AS(ks_two_sample(std::vector<double>(10, 1.0), a), Error);

  // Calibration: independent same-law samples stay inside the band.
  int inside = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(2000), y(2000);
    for (auto& v : x) v = pois(rng);
    for (auto& v : y) v = pois(rng);
    inside += ks_two_sample(x, y, 0.01).within_band();
  }
  CHECK(inside >= 198);
}

TEST_CASE("one-sample KS and Kolmogorov p-values") {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = e(rng);
  CHECK(ks_one_sample_exponential(xs).p_asymptotic > 0.01);
  CHECK(ks_one_sample_exponential(xs, 1.5).p_asymptotic < 1e-6);
  CHECK(kolmogorov_pvalue(0.0, 100) == doctest::Approx(1.0));
  // Critical value 1.628/sqrt(n) has p about 0.01 for large n.
  CHECK(kolmogorov_pvalue(1.6276 / std::sqrt(1e6), 1e6) == doctest::Approx(0.01).epsilon(0.02));
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  CHECK(max_cdf_excess(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(max_cdf_excess(b, a) == 0.0);
}

TEST_CASE("Poisson bounds") {
  const auto eq = poisson_tail_bounds(10.0, 10.0, 1);
  CHECK(eq.lower_tail_bound == doctest::Approx(1.0));
  CHECK(path_event_constant(1) == doctest::Approx(1.0 - std::log(3.0) / 10 - std::log(10.0) / 10 - 0.1));
  CHECK(path_event_constant(1) == doctest::Approx(0.5598).epsilon(1e-3));
  for (int d = 1; d <= 50; ++d) CHECK(path_event_constant(d) > 0.0);
  CHECK_THROWS_AS(poisson_tail_bounds(10.0, 0.0, 1), Error);
  CHECK_THROWS_AS(poisson_tail_bounds(10.0, 11.0, 1), Error);

  for (double t : {1.0, 5.0, 20.0, 50.0}) {
    double acc = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double lg = -t + k * std::log(t) - std::lgamma(k + 1.0);
      CHECK(poisson_pmf(t, k) == doctest::Approx(std::exp(lg)).epsilon(1e-10));
      acc += std::exp(lg);
      if (k <= t) {
        CHECK(std::abs(poisson_lower_tail(t, k) - acc) <= 1e-10);
        if (k > 0) CHECK(poisson_lower_tail(t, k) <= poisson_tail_bounds(t, k, 1).lower_tail_bound + 1e-10);
      }
    }
  }
  double ub = 0.0;
  for (int k = 0; k <= 3; ++k) ub += std::pow(3.0, k) * poisson_pmf(30.0, k);
  CHECK(path_union_bound(30.0, 1) == doctest::Approx(ub).epsilon(1e-12));
}

TEST_CASE("least squares and growth rate") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK_THROWS_AS(least_squares(std::vector<double>{1, 1}, std::vector<double>{1, 2}), Error);

  std::vector<std::vector<double>> tables(120);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (auto& t : tables) {
    for (int u = 0; u <= 60; ++u) t.push_back(2.0 * u + noise(rng));
  }
  const auto g = growth_rate_estimate(tables, 20, 60);
  CHECK(g.rho_hat == doctest::Approx(2.0).epsilon(0.01));
  CHECK(g.rho_inv_hat == doctest::Approx(0.5).epsilon(0.01));
  auto scaled = tables;
  for (auto& t : scaled) {
    for (auto& v : t) v *= 3.0;
  }
  CHECK(growth_rate_estimate(scaled, 20, 60).rho_hat == doctest::Approx(3.0 * g.rho_hat));
  tables.resize(50);
  CHECK_THROWS_AS(growth_rate_estimate(tables, 20, 60), Error);
}

TEST_CASE("variance summary") {
  const std::vector<double> times{5, 10};
  const std::vector<std::vector<double>> constant{std::vector<double>(1000, 4.0), std::vector<double>(1000, 7.0)};
  const auto rows = variance_summary(times, constant, 0.99, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].var == 0.0);
  CHECK(rows[1].ci.hi == 0.0);
  std::vector<std::vector<double>> s(2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    s[0].push_back(n(rng));
    s[1].push_back(n(rng));
  }
  const auto r2 = variance_summary(times, s, 0.99, 1);
  CHECK(r2[0].ci.lo < 4.0);
  CHECK(r2[0].ci.hi > 4.0);
  CHECK(r2[1].var_over_t == doctest::Approx(r2[1].var / 10.0));
  CHECK(r2[1].var_over_log_t == doctest::Approx(r2[1].var / std::log(10.0)));
}

}  // TEST_SUITE
