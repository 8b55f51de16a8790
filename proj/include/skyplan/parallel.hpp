#pragma once

// Deterministic fan-out helpers. Every index writes only its own output slot,
// and reductions happen afterwards in index order, so results never depend on
// the worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skyplan::parallel {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> n{0};  // 0 = all cores
  return n;
}
}  // namespace detail

/// Sets the worker count used by all library fan-outs. 0 selects every core.
inline void set_thread_count(unsigned n) { detail::thread_setting().store(n); }

inline unsigned thread_count() {
  unsigned n = detail::thread_setting().load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Calls fn(i) for i in [0, n). Work is split into contiguous chunks; the
/// first exception thrown by any chunk is rethrown on the caller's thread.
template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Maps fn over [0, n) into a vector ordered by index.
template <class T, class Fn>
std::vector<T> map_indices(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  for_each_index(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace skyplan::parallel
