#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "casclab/chaos.hpp"

using namespace casclab;

TEST_CASE("kernel frozen values and branch continuity") {
  const double eps = 0.125;
  CHECK(kernel_value(eps, eps, 0.3, 0.3) ==
        doctest::Approx(std::log(8.0)).epsilon(1e-15));
  // both branches at d = eps
  const double inner = std::log(8.0) - (8.0 - 1.0) * eps;
  CHECK(kernel_value(eps, eps, 0.0, eps) == doctest::Approx(inner));
  CHECK(kernel_value(eps, eps, 0.0, std::nextafter(eps, 0.0)) ==
        doctest::Approx(inner).epsilon(1e-12));
  // d = 1 joins the zero branch continuously: log 1 - 1 + 1 = 0
  CHECK(kernel_value(eps, eps, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(kernel_value(eps, eps, 0.0, 1.5) == 0.0);
  // mixed scales collapse onto the larger one
  CHECK(kernel_value(0.125, 0.25, 0.1, 0.4) ==
        kernel_value(0.25, 0.25, 0.1, 0.4));
  // symmetry in the points
  CHECK(kernel_value(eps, eps, 0.2, 0.7) == kernel_value(eps, eps, 0.7, 0.2));
}

TEST_CASE("dense covariance is symmetric with log(1/eps) diagonal") {
  const FieldGrid grid(32);
  const double eps = 0.25;
  const auto cov = build_covariance(grid, eps);
  REQUIRE(cov.size() == 32u * 32u);
  for (int i = 0; i < 32; ++i) {
    CHECK(cov[i * 32 + i] == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    for (int j = 0; j < i; ++j) REQUIRE(cov[i * 32 + j] == cov[j * 32 + i]);
  }
}

TEST_CASE("cholesky factor reconstructs the covariance") {
  const FieldGrid grid(48);
  const auto cov = build_covariance(grid, 0.25);
  const auto fac = factorize_covariance(cov, 48, cov[0]);
  CHECK(fac.jitter == 0.0);
  for (int i = 0; i < 48; ++i) {
    for (int j = 0; j <= i; ++j) {
      double ll = 0.0;
      for (int k = 0; k <= j; ++k)
        ll += fac.l[i * 48 + k] * fac.l[j * 48 + k];
      REQUIRE(ll == doctest::Approx(cov[i * 48 + j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("chaos mass normalization in closed-form cases") {
  const FieldGrid grid(64);
  // beta = 0: mass is the Lebesgue measure of [0,1]
  std::vector<double> field(64, 1.7);
  CHECK(chaos_mass(field, {0.0, 0.25}, grid) == doctest::Approx(1.0));
  // zero field: mass = exp(-beta^2/2 log(1/eps))
  std::fill(field.begin(), field.end(), 0.0);
  CHECK(chaos_mass(field, {1.0, 0.25}, grid) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chaos_mass(field, {0.5, 0.25}, grid) ==
        doctest::Approx(std::pow(4.0, -0.125)).epsilon(1e-12));
}

TEST_CASE("eps = 1 gives a vanishing field and a unit mass") {
  const FieldGrid grid(16);
  const auto cov = build_covariance(grid, 1.0);
  for (double v : cov) REQUIRE(v == 0.0);
  const std::vector<double> field(16, 0.0);
  CHECK(chaos_mass(field, {0.9, 1.0}, grid) == doctest::Approx(1.0));
}

TEST_CASE("sampled field variance tracks log(1/eps)") {
  const FieldGrid grid(16);
  const double eps = 1.0 / 8;
  const auto fac = factorize_covariance(build_covariance(grid, eps), 16,
                                        std::log(1.0 / eps));
  RngStream s(42);
  const int draws = 20000;
  std::vector<double> sq(16, 0.0);
  for (int r = 0; r < draws; ++r) {
    const auto f = sample_field(fac, s);
    for (int i = 0; i < 16; ++i) sq[i] += f[i] * f[i];
  }
  for (int i = 0; i < 16; ++i) {
    CHECK(sq[i] / draws == doctest::Approx(std::log(8.0)).epsilon(0.06));
  }
}

TEST_CASE("white-noise model tiles triangles with enough cells") {
  const std::vector<double> points{0.25, 0.5, 0.75};
  const auto model = build_whitenoise_model(points, 0.25, 160);
  CHECK(model.eps == 0.25);
  CHECK(model.n_cells > 0);
  CHECK(model.min_cells_per_triangle >= 100);
  REQUIRE(model.members.size() == 3);
  // total control mass of a triangle is log(1/eps); the cell sum converges
  // to it from the tiling
  for (const auto& mem : model.members) {
    double mass = 0.0;
    for (int c : mem) mass += model.sqrt_lambda[c] * model.sqrt_lambda[c];
    CHECK(mass == doctest::Approx(std::log(4.0)).epsilon(0.02));
  }
  // too coarse a tiling is rejected, not silently accepted
  CHECK_THROWS_AS(build_whitenoise_model(points, 0.25, 8),
                  std::invalid_argument);
}

TEST_CASE("white-noise covariance is cell-exact before sampling") {
  // E X(x) X(y) equals the shared-cell mass, which should match the kernel
  // up to tiling error; this check is deterministic
  const std::vector<double> points{0.3, 0.35, 0.45, 0.6, 0.9};
  const double eps = 0.25;
  const auto model = build_whitenoise_model(points, eps, 200);
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a; b < points.size(); ++b) {
      double shared = 0.0;
      std::size_t ia = 0, ib = 0;
      const auto& ma = model.members[a];
      const auto& mb = model.members[b];
      while (ia < ma.size() && ib < mb.size()) {
        if (ma[ia] == mb[ib]) {
          shared += model.sqrt_lambda[ma[ia]] * model.sqrt_lambda[ma[ia]];
          ++ia;
          ++ib;
        } else if (ma[ia] < mb[ib]) {
          ++ia;
        } else {
          ++ib;
        }
      }
      const double want = kernel_value(eps, eps, points[a], points[b]);
      CHECK(std::abs(shared - want) < 0.04);
    }
  }
}

TEST_CASE("white-noise sampling is reproducible by seed") {
  const std::vector<double> points{0.3, 0.6};
  const auto model = build_whitenoise_model(points, 0.25, 160);
  RngStream a(9), b(9);
  const auto fa = whitenoise_sample(model, a);
  const auto fb = whitenoise_sample(model, b);
  REQUIRE(fa.size() == 2);
  CHECK(fa[0] == fb[0]);
  CHECK(fa[1] == fb[1]);
}

TEST_CASE("decompose draws have the documented shape") {
  const FieldGrid grid(81);
  const DecomposeSampler sampler({0.5, 1.0 / 27}, grid);
  RngStream s(33);
  for (int r = 0; r < 50; ++r) {
    const auto d = sampler.draw(s);
    REQUIRE(d.w0 > 0.0);
    REQUIRE(d.w1 > 0.0);
    REQUIRE(d.m_total > 0.0);
    REQUIRE(d.recombined > 0.0);
    // each w is (1/3) exp(beta inf X - ...) with X the coarse field; the
    // inf over a third never exceeds the sup bound implied by mass one
    CHECK(d.w0 < 10.0);
    CHECK(d.w1 < 10.0);
  }
  CHECK_THROWS_AS(DecomposeSampler({0.5, 0.5}, grid), std::invalid_argument);
}

TEST_CASE("inf-tail probe sees the median at level zero") {
  const FieldGrid grid(96);
  RngStream s(71);
  const auto probe =
      inf_tail_probe(0.5, 1.0 / 9, {0.0, 0.4, 0.8, 1.2}, 3000, grid, s);
  REQUIRE(probe.p_hat.size() == 4);
  // inf over [0,1/3] of a centered field is below zero at least half the time
  CHECK(probe.p_hat[0] >= 0.5);
  for (std::size_t i = 1; i < probe.p_hat.size(); ++i)
    CHECK(probe.p_hat[i] <= probe.p_hat[i - 1]);  // tails nest
  CHECK(probe.slope < 0.0);
}
