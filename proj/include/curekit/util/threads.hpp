#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace curekit {

// Worker-pool width: CUREKIT_THREADS caps it, default = hardware concurrency.
inline int worker_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("CUREKIT_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

// Runs fn(i) for i in [0, n). Results must be written to index-addressed
// slots by the caller; completion order never affects output order.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  int nt = worker_threads();
  if (nt <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  size_t width = std::min<size_t>(static_cast<size_t>(nt), n);
  for (size_t t = 0; t < width; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace curekit
