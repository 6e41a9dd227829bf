#include <doctest.h>

#include "ere/error.hpp"
#include "ere/inference.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace ere;

namespace {

EreEstimate est(double h, Index n, Index s) {
  EreEstimate e;
  e.h_hat = h;
  e.raw_diff = h;
  e.n = n;
  e.s_tilde_m = s;
  return e;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("central case against the oracle") {
  for (int k = 1; k <= 30; ++k) {
    for (double x : {0.01, 0.5, 1.0, 3.0, 7.5, 15.0, 40.0, 80.0}) {
      CHECK(std::abs(ncx2_cdf(k, 0.0, x) - oracle::chi2_cdf(k, x)) <= 1e-9);
    }
  }
  CHECK(ncx2_cdf(1, 0.0, 3.8414588) == doctest::Approx(0.95).epsilon(1e-7));
}

TEST_CASE("support starts at zero") {
  for (int k : {1, 2, 7}) {
    for (double th : {0.0, 0.3, 12.0, 500.0}) {
      CHECK(ncx2_cdf(k, th, 0.0) == 0.0);
      CHECK(ncx2_cdf(k, th, -2.0) == 0.0);
    }
  }
}

TEST_CASE("matches simulated draws") {
  std::mt19937_64 rng(42);
  auto draws = oracle::ncx2_draws(2, 5.0, 10000000, rng);
  std::size_t below = 0;
  for (double v : draws) below += v <= 6.0;
  const double emp = static_cast<double>(below) / static_cast<double>(draws.size());
  CHECK(std::abs(ncx2_cdf(2, 5.0, 6.0) - emp) <= 5e-4);
}

TEST_CASE("decreasing in the noncentrality") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> kd(1, 25);
  std::uniform_real_distribution<double> xd(0.5, 60.0), td(0.0, 40.0);
  for (int i = 0; i < 100; ++i) {
    const int k = kd(rng);
    const double x = xd(rng);
    double t1 = td(rng), t2 = td(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 - t1 < 1e-3) t2 = t1 + 1.0;
    const double f1 = ncx2_cdf(k, t1, x), f2 = ncx2_cdf(k, t2, x);
    if (f1 > 1e-300) CHECK(f1 > f2);
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);
  }
}

TEST_CASE("large noncentrality stays finite") {
  const double f = ncx2_cdf(3, 1e6, 1e6);
  CHECK(std::isfinite(f));
  CHECK(f > 0.4);
  CHECK(f < 0.6);
  CHECK(ncx2_cdf(3, 1e6, 1e5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ncx2_cdf(3, 1e6, 3e6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solving for the noncentrality") {
  CHECK(solve_noncentrality(1, 3.8414588, 0.975) == 0.0);
  const double target = ncx2_cdf(4, 7.3, 11.0);
  CHECK(solve_noncentrality(4, 11.0, target) == doctest::Approx(7.3).epsilon(1e-6));
  const double th = solve_noncentrality(3, 50.0, 0.025);
  CHECK(th > 0.0);
  CHECK(std::abs(ncx2_cdf(3, th, 50.0) - 0.025) <= 1e-8);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 0.99), xd(0.5, 200.0);
  for (int i = 0; i < 100; ++i) {
    const int k = 1 + i % 15;
    const double x = xd(rng), t = u(rng);
    const double s = solve_noncentrality(k, x, t);
    if (s > 0.0) {
      CHECK(std::abs(ncx2_cdf(k, s, x) - t) <= 1e-8);
    } else {
      CHECK(ncx2_cdf(k, 0.0, x) <= t);
    }
  }
}

TEST_CASE("p-value and interval examples") {
  const auto zero = infer(est(0.0, 100, 3), 0.05);
  CHECK(zero.p_value == 1.0);
  CHECK(zero.ci_lower == 0.0);
  CHECK(zero.ci_upper == 0.0);

  const auto a = infer(est(0.10, 100, 3), 0.05);
  CHECK(a.p_value == doctest::Approx(1.0 - oracle::chi2_cdf(3, 10.0)).epsilon(1e-10));
  CHECK(a.p_value == doctest::Approx(0.01857).epsilon(1e-3));

  const auto b = infer(est(3.8414588 / 300.0, 300, 1), 0.05);
  CHECK(b.ci_lower == 0.0);
  const double cu = solve_noncentrality(1, 3.8414588, 0.025);
  CHECK(b.ci_upper == doctest::Approx(cu / 300.0).epsilon(1e-12));
  CHECK(std::abs(ncx2_cdf(1, b.ci_upper * 300.0, 3.8414588) - 0.025) <= 1e-8);
}

TEST_CASE("one-sided bound") {
  const auto e = est(0.2, 200, 4);
  const auto one = infer(e, 0.05, false);
  CHECK(one.one_sided);
  CHECK(std::isinf(one.ci_upper));
  CHECK(one.r2_ci_upper == 1.0);
  CHECK(one.ci_lower == doctest::Approx(solve_noncentrality(4, 40.0, 0.95) / 200.0));
  const auto two = infer(e, 0.05, true);
  CHECK(one.ci_lower >= two.ci_lower);
}

TEST_CASE("interval invariants and the R2 transform") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> hd(0.0, 0.5), ad(0.01, 0.2);
  std::uniform_int_distribution<int> kd(1, 20), nd(50, 1000);
  for (int i = 0; i < 200; ++i) {
    const int n = nd(rng), k = kd(rng);
    const double alpha = ad(rng);
    const auto r = infer(est(hd(rng), n, k), alpha);
    CHECK(0.0 <= r.ci_lower);
    CHECK(r.ci_lower <= r.ci_upper);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(std::abs(r.r2_hat - pseudo_r2(r.h_hat)) <= 1e-12);
    CHECK(std::abs(r.r2_ci_lower - pseudo_r2(r.ci_lower)) <= 1e-12);
    CHECK(std::abs(r.r2_ci_upper - pseudo_r2(r.ci_upper)) <= 1e-12);
    const double x = n * r.h_hat;
    if (ncx2_cdf(k, 0.0, x) <= 1.0 - alpha / 2.0) CHECK(r.ci_lower == 0.0);
    else CHECK(r.ci_lower > 0.0);
  }
}

TEST_CASE("tiny p-values on the log scale") {
  for (int k : {2, 4, 10}) {
    for (double x : {100.0, 800.0, 2000.0, 5000.0}) {
      CHECK(chi2_log_sf(k, x) == doctest::Approx(oracle::chi2_log_sf_even(k, x)).epsilon(1e-9));
    }
  }
  const auto r = infer(est(10.0, 300, 4), 0.05);
  CHECK(r.p_value == 0.0);
  CHECK(r.log_p_value == doctest::Approx(oracle::chi2_log_sf_even(4, 3000.0)).epsilon(1e-9));
  CHECK(chi2_sf(3, 10.0) == doctest::Approx(1.0 - oracle::chi2_cdf(3, 10.0)).epsilon(1e-10));
}

TEST_CASE("screened-out and invalid inputs") {
  EreEstimate e = est(0.0, 100, 0);
  e.screened_out = true;
  const auto r = infer(e, 0.05);
  CHECK(r.screened_out);
  CHECK(r.p_value == 1.0);
  CHECK(r.ci_lower == 0.0);
  CHECK(r.ci_upper == 0.0);
  CHECK_THROWS_AS(infer(est(0.1, 100, 2), 0.0), ConfigError);
  CHECK_THROWS_AS(infer(est(0.1, 100, 2), 1.0), ConfigError);
}

}
