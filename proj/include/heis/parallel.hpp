#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace heis {

// Worker count is a runtime knob (CLI --threads). Work is always split into the same
// batches regardless of the worker count; only scheduling varies, results never do.

inline int& thread_count_ref() {
  static int count = []() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return count;
}

inline void set_thread_count(int n) { thread_count_ref() = n < 1 ? 1 : n; }
inline int thread_count() { return thread_count_ref(); }

// Runs fn(i) for i in [0, count). fn must only write to slot i of caller-owned storage.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
  const int workers = thread_count();
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  std::atomic_flag error_latch = ATOMIC_FLAG_INIT;
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!error_latch.test_and_set()) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int w = 0; w < spawn; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace heis
