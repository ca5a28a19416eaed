#include "doctest.h"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <vector>

#include "casclab/rng.hpp"

using namespace casclab;

TEST_CASE("derive_seed is deterministic and separates nearby inputs") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(0, 0, 0) != derive_seed(0, 0, 1));
}

TEST_CASE("streams with equal seeds replay the same draws") {
  RngStream a(12345), b(12345);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.raw() == b.raw());
  }
  RngStream c(12345), d(12345);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
  }
}

TEST_CASE("uniform stays in (0, 1]") {
  RngStream s(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("normal has roughly unit scale and no non-finite values") {
  RngStream s(8);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("uniform_index covers [0, n) without bias toward a value") {
  RngStream s(9);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[s.uniform_index(5)];
  for (int c : counts) {
    CHECK(c > 9300);
    CHECK(c < 10700);
  }
}

TEST_CASE("parallel_chunks covers the range once, any worker count") {
  const std::size_t total = 10007, chunk = 64;
  std::vector<std::atomic<int>> hits(total);
  for (auto& h : hits) h = 0;
  parallel_chunks(total, chunk, 3, [&](std::size_t ci, std::size_t b,
                                       std::size_t e) {
    CHECK(b == ci * chunk);
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  for (std::size_t i = 0; i < total; ++i) REQUIRE(hits[i] == 1);
}

TEST_CASE("chunk-derived fills are identical at any worker count") {
  const std::size_t total = 5000, chunk = 128;
  const auto fill = [&](int workers) {
    std::vector<double> out(total);
    parallel_chunks(total, chunk, workers,
                    [&](std::size_t ci, std::size_t b, std::size_t e) {
                      RngStream s = RngStream::derived(99, ci);
                      for (std::size_t i = b; i < e; ++i) out[i] = s.normal();
                    });
    return out;
  };
  const auto one = fill(1);
  const auto four = fill(4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < total; ++i) REQUIRE(one[i] == four[i]);
}
