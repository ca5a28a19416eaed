#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "casclab/generator.hpp"
#include "casclab/rng.hpp"

namespace casclab {

inline constexpr int kDefaultDepthCap = 30;

// One realization of the depth-n recursion
//   Y_0 = 1,  Y_k(node) = W_left Y_{k-1}(left) + W_right Y_{k-1}(right)
// with i.i.d. weights, visiting the tree depth-first (weight before subtree,
// left before right). Consumes exactly 2^{n+1} - 2 weight draws and O(n)
// memory. depth above depth_cap is rejected; raise the cap explicitly for
// bigger trees.
double sample_yn(const GeneratorSpec& spec, int depth, RngStream& stream,
                 int depth_cap = kDefaultDepthCap);

// Same recursion with an injectable weight source, for tests that pin the
// exact draw sequence.
double sample_yn_with(const std::function<double()>& draw_weight, int depth,
                      int depth_cap = kDefaultDepthCap);

struct BatchParams {
  int depth = 0;
  std::size_t count = 0;
  std::uint64_t master_seed = 0;
  std::size_t chunk_size = 4096;
  int workers = 0;  // <= 0 picks the default worker count
  int depth_cap = kDefaultDepthCap;
};

// Chunked replicate batch. Chunk ci draws from the stream derived from
// (master_seed, ci), so the output is bit-identical for fixed
// (master_seed, chunk_size) at any worker count.
std::vector<double> sample_yn_batch(const GeneratorSpec& spec,
                                    const BatchParams& params);

// Population-dynamics pool for the fixed point Y =d W0 Y' + W1 Y''.
struct CascadePool {
  std::vector<double> values;
  std::uint64_t generation = 0;
};

CascadePool pool_init(std::size_t size);  // all ones, generation 0; size >= 2

struct PoolEvolveParams {
  std::uint64_t generations = 0;
  std::uint64_t master_seed = 0;
  std::size_t chunk_size = 4096;
  int workers = 0;
};

// Default burn-in: generation count after which pool statistics are treated
// as stationary by the CLI and the verification suites.
inline constexpr std::uint64_t kPoolBurnIn = 50;

// Evolves the pool in place: each generation resamples every slot as
// W0 v_i + W1 v_j with i, j uniform with replacement from the previous
// generation. Per-generation fills are chunk-parallel with streams derived
// from (master_seed, generation, chunk), so results never depend on the
// worker count. The observer, when set, sees the pool after each generation.
void pool_evolve(
    CascadePool& pool, const GeneratorSpec& spec,
    const PoolEvolveParams& params,
    const std::function<void(std::uint64_t, const std::vector<double>&)>&
        observer = nullptr);

struct NegMomentEstimate {
  double value = 0.0;
  double std_error = 0.0;      // jackknife standard error of the mean
  double max_term_share = 0.0; // largest single term over the total
  bool dominated = false;      // true when one pool value carries > 50%
};

// Monte Carlo estimate of E Y^{-q} from pool values.
NegMomentEstimate neg_moment(const std::vector<double>& pool, double q);

}  // namespace casclab
