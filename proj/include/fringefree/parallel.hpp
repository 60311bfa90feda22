#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace fringefree {

// Runs fn(i) for i in [begin, end). Work items must be independent; callers
// write disjoint output slices (typically one image row per item), so results
// do not depend on scheduling order.
inline void parallel_for(int begin, int end, const std::function<void(int)>& fn,
                         int num_threads = 0) {
  if (end <= begin) return;
  if (num_threads <= 0) num_threads = static_cast<int>(std::thread::hardware_concurrency());
  if (num_threads <= 1 || end - begin == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next(begin);
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(num_threads, end - begin);
  pool.reserve(n - 1);
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace fringefree
