#include "casclab/cascade.hpp"

#include <cmath>
#include <stdexcept>

namespace casclab {

namespace {

void check_depth(int depth, int depth_cap) {
  if (depth < 0) throw std::invalid_argument("sample_yn: negative depth");
  if (depth > depth_cap) {
    throw std::invalid_argument(
        "sample_yn: depth " + std::to_string(depth) + " exceeds cap " +
        std::to_string(depth_cap) + "; raise depth_cap explicitly");
  }
}

template <typename Draw>
double recurse(Draw&& draw, int k) {
  if (k == 0) return 1.0;
  const double wl = draw();
  const double yl = recurse(draw, k - 1);
  const double wr = draw();
  const double yr = recurse(draw, k - 1);
  return wl * yl + wr * yr;
}

}  // namespace

double sample_yn(const GeneratorSpec& spec, int depth, RngStream& stream,
                 int depth_cap) {
  check_depth(depth, depth_cap);
  return recurse([&] { return sample_weight(spec, stream); }, depth);
}

double sample_yn_with(const std::function<double()>& draw_weight, int depth,
                      int depth_cap) {
  check_depth(depth, depth_cap);
  return recurse([&] { return draw_weight(); }, depth);
}

std::vector<double> sample_yn_batch(const GeneratorSpec& spec,
                                    const BatchParams& params) {
  if (params.count == 0)
    throw std::invalid_argument("sample_yn_batch: count must be positive");
  check_depth(params.depth, params.depth_cap);
  std::vector<double> out(params.count);
  parallel_chunks(
      params.count, params.chunk_size, params.workers,
      [&](std::size_t ci, std::size_t begin, std::size_t end) {
        RngStream stream = RngStream::derived(params.master_seed, ci);
        for (std::size_t i = begin; i < end; ++i) {
          out[i] = sample_yn(spec, params.depth, stream, params.depth_cap);
        }
      });
  return out;
}

CascadePool pool_init(std::size_t size) {
  if (size < 2)
    throw std::invalid_argument(
        "pool_init: a single-slot pool cannot resample pairs; need size >= 2");
  CascadePool pool;
  pool.values.assign(size, 1.0);
  pool.generation = 0;
  return pool;
}

void pool_evolve(
    CascadePool& pool, const GeneratorSpec& spec,
    const PoolEvolveParams& params,
    const std::function<void(std::uint64_t, const std::vector<double>&)>&
        observer) {
  if (pool.values.size() < 2)
    throw std::invalid_argument("pool_evolve: pool too small");
  const std::size_t m = pool.values.size();
  std::vector<double> next(m);
  for (std::uint64_t g = 0; g < params.generations; ++g) {
    const std::uint64_t gen = pool.generation + 1;
    const std::vector<double>& prev = pool.values;
    parallel_chunks(
        m, params.chunk_size, params.workers,
        [&](std::size_t ci, std::size_t begin, std::size_t end) {
          RngStream stream =
              RngStream::derived(params.master_seed, gen, ci);
          for (std::size_t k = begin; k < end; ++k) {
            const std::size_t i = stream.uniform_index(m);
            const std::size_t j = stream.uniform_index(m);
            const double w0 = sample_weight(spec, stream);
            const double w1 = sample_weight(spec, stream);
            next[k] = w0 * prev[i] + w1 * prev[j];
          }
        });
    pool.values.swap(next);
    pool.generation = gen;
    if (observer) observer(pool.generation, pool.values);
  }
}

NegMomentEstimate neg_moment(const std::vector<double>& pool, double q) {
  if (pool.empty()) throw std::invalid_argument("neg_moment: empty pool");
  if (!(q > 0.0)) throw std::invalid_argument("neg_moment: q must be positive");
  const std::size_t n = pool.size();
  double total = 0.0;
  double max_term = 0.0;
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pool[i] > 0.0))
      throw std::invalid_argument("neg_moment: pool values must be positive");
    terms[i] = std::pow(pool[i], -q);
    total += terms[i];
    if (terms[i] > max_term) max_term = terms[i];
  }
  NegMomentEstimate est;
  est.value = total / static_cast<double>(n);
  double ss = 0.0;
  for (double t : terms) {
    const double d = t - est.value;
    ss += d * d;
  }
  // For a sample mean the jackknife collapses to s / sqrt(n).
  est.std_error = n > 1 ? std::sqrt(ss / (static_cast<double>(n) - 1.0) /
                                    static_cast<double>(n))
                        : 0.0;
  est.max_term_share = total > 0.0 ? max_term / total : 0.0;
  est.dominated = est.max_term_share > 0.5;
  return est;
}

}  // namespace casclab
