#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace casclab {

// SplitMix64 mixing step. Used to derive child stream seeds from
// (master_seed, index...) tuples; the chain is platform independent.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Deterministic random stream. mt19937_64's output sequence is pinned by the
// C++ standard, and uniform/normal are built directly on raw 64-bit words, so
// a stream's draw sequence depends only on its seed. That property is what
// makes chunked parallel sampling reproducible independent of worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  static RngStream derived(std::uint64_t master, std::uint64_t a,
                           std::uint64_t b = 0, std::uint64_t c = 0) {
    return RngStream(derive_seed(master, a, b, c));
  }

  std::uint64_t raw() { return eng_(); }

  // Uniform on (0,1]; never returns 0 so log(u) is always finite.
  double uniform() {
    return static_cast<double>((raw() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via the polar method with pair caching.
  double normal();

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Splits [0, total) into chunks of chunk_size and runs fn(chunk_index, begin,
// end) for each, on `workers` threads. Chunk boundaries depend only on
// (total, chunk_size), never on the worker count, so callers seeding one
// stream per chunk index get identical results for any parallelism level.
// workers <= 0 picks the default (CASCADE_LAB_THREADS or hardware size).
void parallel_chunks(std::size_t total, std::size_t chunk_size, int workers,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

int default_worker_count();

}  // namespace casclab
