#pragma once

#include <thread>
#include <vector>

namespace splat4d::detail {

/// Runs fn(i, worker) for i in [0, n). Item i goes to worker i % threads, so
/// the assignment (and any per-worker reduction order) is deterministic.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, n, workers, w] {
      for (int i = w; i < n; i += workers) fn(i, w);
    });
  }
}

inline int worker_count(int n, int threads) { return threads <= 1 ? 1 : std::min(threads, n < 1 ? 1 : n); }

}  // namespace splat4d::detail
