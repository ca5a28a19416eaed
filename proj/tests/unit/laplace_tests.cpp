#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "casclab/laplace.hpp"

using namespace casclab;

TEST_CASE("log grid keeps octaves bitwise exact") {
  const auto grid = make_log_grid(1e-2, 1e8, 512);
  REQUIRE(grid.per_octave > 0);
  // the request rounds to whole points per octave, so the realized size can
  // land just under the ask (511 here: 15/octave over 34 octaves)
  REQUIRE(grid.t.size() >= 448);
  REQUIRE(grid.t.size() <= 576);
  CHECK(grid.t.front() <= 1e-2);
  CHECK(grid.t.back() >= 1e8);
  for (std::size_t i = 0; i + grid.per_octave < grid.t.size(); ++i) {
    REQUIRE(grid.t[i + grid.per_octave] == 2.0 * grid.t[i]);
  }
  for (std::size_t i = 1; i < grid.t.size(); ++i)
    REQUIRE(grid.t[i] > grid.t[i - 1]);
}

TEST_CASE("empirical transform of the constant 1 is e^-t") {
  const auto grid = make_log_grid(1e-2, 1e4, 64);
  const std::vector<double> ones(100, 1.0);
  const auto table = empirical_phi(ones, grid.t);
  REQUIRE(table.t.size() == grid.t.size());
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    CHECK(table.log_phi[i] == doctest::Approx(-table.t[i]).epsilon(1e-14));
  }
  CHECK(table.sample_count == 100);
}

TEST_CASE("empirical transform keeps tail values as finite logs") {
  // y ~ 2: phi(1e8) ~ e^-2e8 underflows any double, log_phi must survive
  const std::vector<double> sample{1.5, 2.0, 2.5};
  const auto grid = make_log_grid(1e-2, 1e8, 128);
  const auto table = empirical_phi(sample, grid.t);
  const double last = table.log_phi.back();
  CHECK(std::isfinite(last));
  // dominated by the smallest sample point: log(1/3) - 1.5e8 + o(1)
  CHECK(last == doctest::Approx(std::log(1.0 / 3) - 1.5 * table.t.back())
                    .epsilon(1e-9));
}

TEST_CASE("iteration on deterministic-half lands on e^-t") {
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  const auto table = iterate_phi(make_deterministic_half(), grid);
  REQUIRE(table.converged);
  double worst = 0.0;
  for (std::size_t i = 0; i < table.t.size(); ++i)
    worst = std::max(worst, std::abs(table.log_phi[i] + table.t[i]));
  CHECK(worst == 0.0);  // octave-exact halving makes the fixed point exact
  CHECK(table.iterations >= 1);
}

TEST_CASE("iteration rejects grids below the contracted span") {
  const auto grid = make_log_grid(1e-2, 1e6, 128);
  CHECK_THROWS_AS(iterate_phi(make_deterministic_half(), grid),
                  std::invalid_argument);
}

TEST_CASE("interpolation rules of phi_at") {
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  const auto table = iterate_phi(make_deterministic_half(), grid);
  // exact on grid nodes
  CHECK(log_phi_at(table, grid.t[10]) == table.log_phi[10]);
  // e^-t below the grid
  CHECK(log_phi_at(table, 1e-5) == doctest::Approx(-1e-5).epsilon(1e-12));
  // between nodes: within the bracketing node values
  const double tm = std::sqrt(grid.t[40] * grid.t[41]);
  const double lp = log_phi_at(table, tm);
  CHECK(lp <= table.log_phi[40]);
  CHECK(lp >= table.log_phi[41]);
  // the linear-in-(log t, log phi) rule is exact for phi = e^-t at the
  // geometric midpoint only up to curvature; sanity band instead of equality
  CHECK(phi_at(table, tm) == doctest::Approx(std::exp(-tm)).epsilon(1e-2));
  // far extrapolation is refused
  CHECK_THROWS_AS(log_phi_at(table, 1e14), std::runtime_error);
}

TEST_CASE("functional residual vanishes for the degenerate family") {
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  const auto spec = make_deterministic_half();
  const auto table = iterate_phi(spec, grid);
  CHECK(functional_residual(table, spec, 128) < 1e-12);
}

TEST_CASE("lognormal iteration converges and is monotone in t") {
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  IterateParams p;
  const auto table = iterate_phi(make_lognormal(0.5), grid, p);
  REQUIRE(table.converged);
  CHECK(table.final_sup_change < p.tol);
  CHECK(table.error_bracket > 0.0);
  CHECK(table.error_bracket < 1e-5);
  for (std::size_t i = 1; i < table.t.size(); ++i)
    REQUIRE(table.log_phi[i] <= table.log_phi[i - 1]);
  // phi(0+) -> 1 and a visibly decayed far end
  CHECK(table.phi(0) > 0.98);
  CHECK(table.log_phi.back() < -100.0);
}

TEST_CASE("exponent fit on synthetic double-log power laws") {
  LaplaceTable table;
  table.method = LaplaceMethod::iterated;
  for (int i = 0; i <= 60; ++i) {
    const double t = std::pow(10.0, 1.0 + i * 0.1);
    table.t.push_back(t);
    table.log_phi.push_back(-std::pow(std::log(t), 1.7));
  }
  const auto est = fit_exponent(table, 50.0, 1e7);
  CHECK(est.fit.slope == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(est.fit.residual_norm < 1e-10);
  CHECK(est.window_lo == 50.0);
  // windows washing over phi >= 1/e are rejected: here phi(t) < 1/e needs
  // (log t)^1.7 > 1, true for every t > e, so shrink to a bad range instead
  LaplaceTable flat;
  flat.method = LaplaceMethod::iterated;
  for (int i = 0; i <= 10; ++i) {
    flat.t.push_back(1.01 + i * 0.001);
    flat.log_phi.push_back(-0.5);  // phi = e^-0.5 > 1/e
  }
  CHECK_THROWS_AS(fit_exponent(flat, 1.0, 2.0), std::invalid_argument);
}
