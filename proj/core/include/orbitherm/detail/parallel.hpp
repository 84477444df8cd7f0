#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace orbitherm::detail {

// Runs fn(begin, end) over disjoint chunks of [0, count). Results must be
// written to per-index slots (or per-chunk accumulators merged by index) so
// the outcome is independent of scheduling.
inline void parallel_for(long count, int threads,
                         const std::function<void(long, long)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2 * threads) {
    fn(0, count);
    return;
  }
  long chunk = (count + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    long b = t * chunk, e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back(fn, b, e);
  }
  for (auto& th : pool) th.join();
}

}  // namespace orbitherm::detail
