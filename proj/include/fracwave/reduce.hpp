#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace fracwave {

// Pairwise (tree) summation. The reduction order depends only on the length
// of the input, so repeated evaluation on identical data is bit-identical
// regardless of how many worker threads the caller owns.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double acc = v[0];
    for (std::size_t i = 1; i < n; ++i) acc += v[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <typename F>
double pairwise_sum_transformed(std::size_t lo, std::size_t hi, F&& f) {
  const std::size_t n = hi - lo;
  if (n == 0) return 0.0;
  if (n <= 8) {
    double acc = f(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += f(i);
    return acc;
  }
  const std::size_t mid = lo + n / 2;
  return pairwise_sum_transformed(lo, mid, f) + pairwise_sum_transformed(mid, hi, f);
}

// Runs fn(i) for i in [0, n) on up to n_threads workers. Each index owns its
// output slot, so the merge order never affects results.
inline void parallel_for(std::size_t n, unsigned n_threads,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fracwave
