#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace fragsim {

// Replica-level worker pool. Work item r must write only to its own slot, so
// results are independent of the thread count.
template <class F>
void parallel_replicas(long n, int threads, F&& fn) {
  if (threads <= 1) {
    for (long r = 0; r < n; ++r) fn(r);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (long r; (r = next.fetch_add(1)) < n;) fn(r);
    });
  for (auto& th : pool) th.join();
}

}  // namespace fragsim
