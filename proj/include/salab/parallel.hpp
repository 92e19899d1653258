#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace salab {

/// Worker count: SA_LAB_THREADS if set and positive, else hardware concurrency.
inline int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("SA_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return std::min(v, std::max(hw, v));
  }
  return hw;
}

/// Runs body(i) for i in [0, n). Results must be written to per-index slots, so the outcome
/// does not depend on scheduling. The first exception is rethrown after all workers join.
template <class Body>
void parallel_for(int n, Body&& body, int threads = thread_budget()) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace salab
