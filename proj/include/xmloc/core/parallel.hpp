#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xmloc {

inline int default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(worker_id, index) for every index in [0, n) on up to `workers`
/// threads, never more than the hardware runs concurrently. Indices are claimed dynamically; fn must write only to
/// index-owned output so the result does not depend on scheduling. The first
/// exception thrown by any task is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const int cap = std::min(std::max(1, workers), default_workers());
  const std::size_t nthreads = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(0, i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](int wid) {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(wid, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(nthreads - 1);
  for (std::size_t t = 1; t < nthreads; ++t) threads.emplace_back(body, static_cast<int>(t));
  body(0);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace xmloc
