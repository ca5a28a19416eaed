#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "casclab/stats.hpp"

using namespace casclab;

namespace {

// Binomial tail P(Bin(n, p) <= k) by direct summation in log space; slow but
// independent of the Boost incomplete-beta route used by the implementation.
double binom_cdf(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  double total = 0.0;
  double log_c = 0.0;  // log C(n, i)
  for (std::uint64_t i = 0; i <= k; ++i) {
    if (i > 0) log_c += std::log(double(n - i + 1)) - std::log(double(i));
    total += std::exp(log_c + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return total;
}

}  // namespace

TEST_CASE("ecdf basics") {
  Ecdf f({3.0, 1.0, 2.0});
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == doctest::Approx(1.0 / 3));
  CHECK(f(2.5) == doctest::Approx(2.0 / 3));
  CHECK(f(3.0) == 1.0);
  CHECK(f.survival_geq(2.0) == doctest::Approx(2.0 / 3));
  CHECK(f.survival_geq(3.5) == 0.0);
  CHECK_THROWS_AS(Ecdf(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("two-sample ks distance, hand values") {
  Ecdf a({1.0, 2.0, 3.0});
  Ecdf b({1.5, 2.5, 3.5});
  CHECK(ks_distance(a, b) == doctest::Approx(1.0 / 3));
  CHECK(ks_distance(a, a) == 0.0);
  Ecdf lo({0.0, 0.1}), hi({10.0, 11.0});
  CHECK(ks_distance(lo, hi) == 1.0);
}

TEST_CASE("clopper-pearson against the exact binomial tail") {
  const auto ci = clopper_pearson(3, 100, 0.95);
  // frozen endpoints for x=3, n=100 at 95%
  CHECK(ci.lower == doctest::Approx(0.0062305).epsilon(1e-4));
  CHECK(ci.upper == doctest::Approx(0.0851768).epsilon(1e-4));
  // defining property: the upper endpoint puts exactly alpha/2 mass at <= 3,
  // the lower endpoint exactly alpha/2 at >= 3
  CHECK(binom_cdf(3, 100, ci.upper) == doctest::Approx(0.025).epsilon(1e-6));
  CHECK(1.0 - binom_cdf(2, 100, ci.lower) ==
        doctest::Approx(0.025).epsilon(1e-6));
}

TEST_CASE("clopper-pearson edge counts") {
  const auto none = clopper_pearson(0, 50, 0.99);
  CHECK(none.lower == 0.0);
  CHECK(none.upper > 0.0);
  CHECK(none.upper < 0.2);
  const auto all = clopper_pearson(50, 50, 0.99);
  CHECK(all.upper == 1.0);
  CHECK(all.lower > 0.8);
  CHECK_THROWS_AS(clopper_pearson(5, 4, 0.95), std::invalid_argument);
}

TEST_CASE("loglog fit recovers a synthetic double-log power law") {
  // phi(t) = exp(-(log t)^2): log log(1/phi) = 2 log log t exactly
  std::vector<double> t, phi;
  for (int i = 0; i < 30; ++i) {
    const double ti = std::pow(10.0, 1.0 + 0.2 * i);
    t.push_back(ti);
    phi.push_back(std::exp(-std::pow(std::log(ti), 2.0)));
  }
  const auto fit = loglog_fit(t, phi);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fit.residual_norm < 1e-10);
  CHECK(fit.points == 30);
  REQUIRE(fit.local_slopes.size() == 29);
  for (double s : fit.local_slopes) CHECK(s == doctest::Approx(2.0));
}

TEST_CASE("loglog fit input validation") {
  std::vector<double> t{10, 100, 1000, 10000};
  std::vector<double> phi{0.1, 0.01, 0.001, 0.0001};
  CHECK_THROWS_AS(loglog_fit(t, phi), std::invalid_argument);  // 4 < 5 points
  t.push_back(1e5);
  phi.push_back(0.9);  // phi >= 1/e has no double log
  CHECK_THROWS_AS(loglog_fit(t, phi), std::invalid_argument);
}

TEST_CASE("dominance check direction and slack") {
  Ecdf big({2.0, 3.0, 4.0, 5.0});
  Ecdf small({1.0, 2.0, 3.0, 4.0});
  const auto ok = dominance_check(big, small, 0.0);
  CHECK(ok.pass);
  CHECK(ok.worst_gap <= 0.0);
  const auto flipped = dominance_check(small, big, 0.0);
  CHECK_FALSE(flipped.pass);
  CHECK(flipped.worst_gap > 0.2);
  // slack forgives a bounded violation
  const auto forgiven = dominance_check(small, big, 1.0);
  CHECK(forgiven.pass);
}
