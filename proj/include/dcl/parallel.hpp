#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dcl {

/// Process-wide worker count used by data-parallel loops (0 = hardware).
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs fn(i) for i in [0, count). Work is split into contiguous chunks; each
/// index is processed exactly once, so any per-index output is independent
/// of the worker count. Reductions must be done by the caller in index order.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  // First failure per chunk; the lowest chunk's error is rethrown.
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(count, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([lo, hi, w, &fn, &errors] {
        try {
          for (std::size_t i = lo; i < hi; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace dcl
