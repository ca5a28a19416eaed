#include <benchmark/benchmark.h>

#include <cmath>

#include "casclab/cascade.hpp"
#include "casclab/chaos.hpp"
#include "casclab/laplace.hpp"
#include "casclab/rng.hpp"

using namespace casclab;

static void BM_SampleYn(benchmark::State& state) {
  const auto spec = make_lognormal(0.5);
  const int depth = static_cast<int>(state.range(0));
  RngStream stream(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_yn(spec, depth, stream));
  }
  state.SetItemsProcessed(state.iterations() * ((2ll << depth) - 2));
}
BENCHMARK(BM_SampleYn)->Arg(8)->Arg(12)->Arg(16);

static void BM_PoolGeneration(benchmark::State& state) {
  const auto spec = make_lognormal(0.5);
  const std::size_t size = static_cast<std::size_t>(state.range(0));
  CascadePool pool = pool_init(size);
  PoolEvolveParams p;
  p.generations = 1;
  p.master_seed = 2;
  p.workers = 1;
  for (auto _ : state) {
    pool_evolve(pool, spec, p);
  }
  state.SetItemsProcessed(state.iterations() * size);
}
BENCHMARK(BM_PoolGeneration)->Arg(10000)->Arg(100000);

static void BM_IteratePhi(benchmark::State& state) {
  const auto spec = make_lognormal(0.5);
  const auto grid = make_log_grid(1e-2, 1e8, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(iterate_phi(spec, grid));
  }
}
BENCHMARK(BM_IteratePhi)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_ChaosFieldDraw(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FieldGrid grid(n);
  const auto fac =
      factorize_covariance(build_covariance(grid, 1.0 / 128), n, std::log(128.0));
  RngStream stream(3);
  for (auto _ : state) {
    const auto field = sample_field(fac, stream);
    benchmark::DoNotOptimize(chaos_mass(field, {0.5, 1.0 / 128}, grid));
  }
}
BENCHMARK(BM_ChaosFieldDraw)->Arg(128)->Arg(512);

static void BM_WhitenoiseDraw(benchmark::State& state) {
  std::vector<double> points;
  for (int i = 0; i < 8; ++i) points.push_back(0.1 + i * 0.1);
  const auto model = build_whitenoise_model(points, 0.25, 160);
  RngStream stream(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(whitenoise_sample(model, stream));
  }
}
BENCHMARK(BM_WhitenoiseDraw);

BENCHMARK_MAIN();
