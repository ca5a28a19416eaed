#include "casclab/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

namespace casclab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = splitmix64(master ^ 0x6c617363'6c616221ull);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_ = v * f;
  has_cached_ = true;
  return u * f;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t rem = (~std::uint64_t{0}) % n;  // 2^64 - 1 mod n
  for (;;) {
    const std::uint64_t r = raw();
    const std::uint64_t v = r % n;
    // Reject the incomplete top block of size (2^64 mod n).
    if (r - v <= ~std::uint64_t{0} - rem) return v;
  }
}

int default_worker_count() {
  if (const char* env = std::getenv("CASCADE_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_chunks(std::size_t total, std::size_t chunk_size, int workers,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn) {
  if (total == 0) return;
  if (chunk_size == 0) throw std::invalid_argument("parallel_chunks: chunk_size must be positive");
  const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
  if (workers <= 0) workers = default_worker_count();
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n_chunks);

  if (n_workers <= 1) {
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
      const std::size_t begin = ci * chunk_size;
      fn(ci, begin, std::min(begin + chunk_size, total));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t ci = next.fetch_add(1);
        if (ci >= n_chunks) return;
        const std::size_t begin = ci * chunk_size;
        fn(ci, begin, std::min(begin + chunk_size, total));
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace casclab
