#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "casclab/bounds.hpp"
#include "casclab/laplace.hpp"

using namespace casclab;

TEST_CASE("bootstrap sequence hand values at gamma = 2") {
  const auto seq = alpha_sequence(2.0, 1e-10);
  REQUIRE(seq.alpha.size() >= 3);
  CHECK(seq.alpha[0] == 1.0);
  CHECK(seq.alpha[1] == doctest::Approx(4.0 / 3).epsilon(1e-15));
  CHECK(seq.alpha[2] == doctest::Approx(14.0 / 9).epsilon(1e-15));
  CHECK(seq.gap[0] == 1.0);  // gamma - alpha_0
  for (std::size_t i = 1; i < seq.alpha.size(); ++i) {
    REQUIRE(seq.alpha[i] > seq.alpha[i - 1]);
    REQUIRE(seq.alpha[i] < 2.0);
    REQUIRE(seq.gap[i] == doctest::Approx(2.0 - seq.alpha[i]).epsilon(1e-9));
  }
  CHECK(seq.gap.back() < 1e-10);
}

TEST_CASE("gap recursion equals the closed form at full precision") {
  for (double gamma : {1.5, 2.0, 3.0}) {
    const auto seq = alpha_sequence(gamma, 1e-14);
    const double r = gamma / (gamma + 1.0);
    const std::size_t n = std::min<std::size_t>(seq.gap.size() - 1, 60);
    for (std::size_t k = 0; k <= n; ++k) {
      const double closed = (gamma - 1.0) * std::pow(r, double(k));
      REQUIRE(std::abs(seq.gap[k] - closed) <= 1e-12 * closed);
    }
  }
}

TEST_CASE("frozen gap value, gamma = 1.5 at n = 10") {
  const auto seq = alpha_sequence(1.5, 1e-6);
  REQUIRE(seq.gap.size() > 10);
  CHECK(seq.gap[10] == doctest::Approx(0.5 * std::pow(0.6, 10)).epsilon(1e-13));
  CHECK(seq.gap[10] == doctest::Approx(0.0030233088).epsilon(1e-8));
}

TEST_CASE("alpha sequence input validation") {
  CHECK_THROWS_AS(alpha_sequence(1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(alpha_sequence(0.5, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(alpha_sequence(2.0, 0.0), std::invalid_argument);
}

TEST_CASE("k0 sits at the minimum of the two-term profile") {
  const struct {
    double c, c_alpha, alpha, gamma, t;
  } cases[] = {{1.9, 0.7, 1.4, 2.0, 1e6},
               {0.8, 1.1, 1.2, 1.5, 1e8},
               {3.0, 0.5, 2.2, 3.0, 1e10}};
  for (const auto& cs : cases) {
    const double k0 = k0_optimal(cs.c, cs.c_alpha, cs.alpha, cs.gamma, cs.t);
    REQUIRE(k0 > 0.0);
    const double f0 = f_t(k0, cs.c, cs.c_alpha, cs.alpha, cs.gamma, cs.t);
    for (double bump : {1.0 + 1e-4, 1.0 - 1e-4, 1.5, 0.5}) {
      CHECK(f_t(k0 * bump, cs.c, cs.c_alpha, cs.alpha, cs.gamma, cs.t) >=
            f0 * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("small-deviation bridges on the degenerate table") {
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  const auto table = iterate_phi(make_deterministic_half(), grid);
  // upper: e phi(1/x) with phi = e^-t; t = 10 sits between grid points, so
  // allow the log-linear chord of e^-t at this spacing (~1% here)
  CHECK(smalldev_upper(table, 0.1) ==
        doctest::Approx(std::exp(1.0 - 10.0)).epsilon(0.011));
  const std::size_t k = table.t.size() / 2;
  CHECK(smalldev_upper(table, 1.0 / table.t[k]) ==
        doctest::Approx(std::exp(1.0) * table.phi(k)).epsilon(1e-12));
  // lower: phi(x^-2) - e^{-1/x} is negative here and clamps to zero
  CHECK(smalldev_lower(table, 0.1) == 0.0);
  // degenerate Y == 1: P(Y <= x) = 0 for x < 1, bridges must bracket that
  CHECK(smalldev_upper(table, 0.5) >= 0.0);
}

TEST_CASE("envelope formula frozen point") {
  // q^q e^-q t^-q E[Y^-q] at q=2, t=10, E=3: 4 e^-2 / 100 * 3
  CHECK(molchan_envelope(3.0, 2.0, 10.0) ==
        doctest::Approx(4.0 * std::exp(-2.0) * 0.03).epsilon(1e-12));
  CHECK(log_molchan_envelope(3.0, 2.0, 10.0) ==
        doctest::Approx(std::log(molchan_envelope(3.0, 2.0, 10.0)))
            .epsilon(1e-12));
}

TEST_CASE("certified bound picks the right probe count") {
  const auto cert = certify_tail(make_lognormal(0.5), TailDirection::cdf_lower,
                                 2.0, 1e-12, 0.2, 2048);
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  const auto table = iterate_phi(make_lognormal(0.5), grid);
  const double phi_xp = phi_at(table, 1.0 / cert.x_prime) - table.error_bracket;
  REQUIRE(phi_xp > 0.0);

  // n is the deepest level with t^(-2^-n) <= x' = 0.2: at t = 1e4 the probes
  // 0.01 and 0.1 qualify but 1e4^-1/8 = 0.316 does not, so n = 2; at t = 1e8
  // the chain reaches 1e-4, 0.01, 0.1, and stops there, so n = 3
  const auto b4 = phi_lower_certified(cert, phi_xp, 1e4);
  CHECK(b4.n == 2);
  CHECK(b4.cert_holds_at_probes);
  const auto b8 = phi_lower_certified(cert, phi_xp, 1e8);
  CHECK(b8.n == 3);
  CHECK(b8.cert_holds_at_probes);
  // product dominates the closed form when the probes hold
  CHECK(b4.log_product >= b4.log_closed);
  CHECK(b8.log_product >= b8.log_closed);
  // and the lower bound stays a lower bound
  CHECK(b4.log_product <= log_phi_at(table, 1e4));
  CHECK(b8.log_product <= log_phi_at(table, 1e8));
}

TEST_CASE("bound report flags and threshold") {
  const auto cert = certify_tail(make_lognormal(0.5), TailDirection::cdf_lower,
                                 2.0, 1e-12, 0.2, 2048);
  const auto grid = make_log_grid(1e-2, 1e8, 256);
  const auto table = iterate_phi(make_lognormal(0.5), grid);
  const auto report = make_bound_report(table, cert, {}, {});
  REQUIRE(report.rows.size() == table.t.size());
  const double threshold = 1.0 / (cert.x_prime * cert.x_prime);
  bool saw_valid = false;
  for (const auto& row : report.rows) {
    if (row.t < threshold) {
      REQUIRE_FALSE(row.sandwich_valid);
    } else {
      REQUIRE(row.sandwich_valid);
      saw_valid = true;
      REQUIRE(row.pass_product_le_phi);
      REQUIRE(row.pass_product_ge_closed);
    }
  }
  CHECK(saw_valid);
  CHECK(report.all_pass);
  CHECK(report.phi_input > 0.0);
}

TEST_CASE("tau distribution masses sum into the overflow split") {
  RngStream s(606);
  const auto spec = make_lognormal(0.5);
  const auto tau = tau_distribution(spec, 1e6, 12, 4000, s);
  REQUIRE(tau.p.size() == 12);
  double total = tau.p_overflow;
  for (double p : tau.p) {
    REQUIRE(p >= 0.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(tau.domination.size() == 12);
  // each mass is bounded by its union-bound majorant (with MC tolerance)
  for (std::size_t k = 0; k < tau.p.size(); ++k) {
    CHECK(tau.p[k] <= tau.domination[k] + 3.0 * std::sqrt(0.25 / 4000.0));
  }
}
