#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "casclab/cascade.hpp"

using namespace casclab;

TEST_CASE("deterministic-half collapses to the constant 1 at every depth") {
  const auto spec = make_deterministic_half();
  RngStream s(1);
  for (int depth = 0; depth <= 12; ++depth) {
    CHECK(sample_yn(spec, depth, s) == 1.0);
  }
}

TEST_CASE("injected weights pin the depth-first evaluation order") {
  // depth 1: Y = w0 * 1 + w1 * 1
  {
    std::vector<double> weights{0.3, 0.6};
    std::size_t i = 0;
    const double y = sample_yn_with([&] { return weights.at(i++); }, 1);
    CHECK(y == doctest::Approx(0.9));
    CHECK(i == 2);
  }
  // depth 2, weight before subtree and left before right:
  // draws w0, then left subtree (a0, a1), then w1, then right (b0, b1)
  {
    std::vector<double> weights{0.5, 0.25, 0.75, 2.0, 1.0, 3.0};
    std::size_t i = 0;
    const double y = sample_yn_with([&] { return weights.at(i++); }, 2);
    // 0.5 * (0.25 + 0.75) + 2 * (1 + 3)
    CHECK(y == doctest::Approx(0.5 * 1.0 + 2.0 * 4.0));
    CHECK(i == 6);
  }
}

TEST_CASE("a depth-n sample consumes exactly 2^(n+1) - 2 draws") {
  for (int depth : {0, 1, 3, 7, 10}) {
    std::size_t draws = 0;
    sample_yn_with(
        [&] {
          ++draws;
          return 0.5;
        },
        depth);
    CHECK(draws == (std::size_t{2} << depth) - 2);
  }
}

TEST_CASE("depth above the cap is rejected, raising the cap admits it") {
  RngStream s(2);
  const auto spec = make_deterministic_half();
  CHECK_THROWS_AS(sample_yn(spec, kDefaultDepthCap + 1, s),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_yn(spec, -1, s), std::invalid_argument);
  CHECK(sample_yn(spec, 31, s, 31) == 1.0);
}

TEST_CASE("batches are reproducible and worker-count invariant") {
  const auto spec = make_lognormal(0.5);
  BatchParams p;
  p.depth = 6;
  p.count = 2000;
  p.master_seed = 77;
  p.chunk_size = 128;
  p.workers = 1;
  const auto a = sample_yn_batch(spec, p);
  p.workers = 4;
  const auto b = sample_yn_batch(spec, p);
  REQUIRE(a.size() == p.count);
  REQUIRE(b.size() == p.count);
  for (std::size_t i = 0; i < p.count; ++i) REQUIRE(a[i] == b[i]);
  // different seed, different batch
  p.master_seed = 78;
  const auto c = sample_yn_batch(spec, p);
  CHECK(a[0] != c[0]);
}

TEST_CASE("batch mean stays near one (martingale property, shallow)") {
  const auto spec = make_lognormal(0.5);
  BatchParams p;
  p.depth = 5;
  p.count = 20000;
  p.master_seed = 11;
  const auto ys = sample_yn_batch(spec, p);
  double mean = 0.0;
  for (double y : ys) {
    REQUIRE(y > 0.0);
    mean += y;
  }
  mean /= double(p.count);
  CHECK(std::abs(mean - 1.0) < 0.02);
}

TEST_CASE("pool of a degenerate family is a fixed point of evolution") {
  const auto spec = make_deterministic_half();
  CascadePool pool = pool_init(500);
  PoolEvolveParams e;
  e.generations = 10;
  e.master_seed = 3;
  std::uint64_t seen = 0;
  pool_evolve(pool, spec, e, [&](std::uint64_t gen, const std::vector<double>& v) {
    ++seen;
    CHECK(gen == seen);
    for (double x : v) REQUIRE(x == 1.0);
  });
  CHECK(seen == 10);
  CHECK(pool.generation == 10);
  for (double v : pool.values) REQUIRE(v == 1.0);
}

TEST_CASE("pool evolution is worker-count invariant") {
  const auto spec = make_lognormal(0.5);
  PoolEvolveParams e;
  e.generations = 5;
  e.master_seed = 456;
  CascadePool a = pool_init(3000), b = pool_init(3000);
  e.workers = 1;
  pool_evolve(a, spec, e);
  e.workers = 4;
  pool_evolve(b, spec, e);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    REQUIRE(a.values[i] == b.values[i]);
}

TEST_CASE("negative moment of a pool of ones is exactly one") {
  const std::vector<double> ones(100, 1.0);
  const auto est = neg_moment(ones, 2.0);
  CHECK(est.value == 1.0);
  CHECK(est.std_error == 0.0);
  CHECK_FALSE(est.dominated);
}

TEST_CASE("negative moment flags a dominating tiny value") {
  std::vector<double> pool(1000, 1.0);
  pool[17] = 1e-6;  // contributes 1e12 to E Y^-2, dwarfing everything
  const auto est = neg_moment(pool, 2.0);
  CHECK(est.dominated);
  CHECK(est.max_term_share > 0.99);
}
