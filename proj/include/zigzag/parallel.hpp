#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace zigzag {

/// Number of workers to use when the caller asks for `requested` (0 = all
/// hardware threads).
inline std::size_t resolve_jobs(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls body(k) for k in [0, n) on up to `jobs` threads. Work items must be
/// independent; each writes only its own slot. If any item throws, the
/// exception from the lowest failing index is rethrown after all workers
/// stop, so error reporting does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, std::size_t jobs, Body&& body) {
  jobs = std::min(resolve_jobs(jobs), std::max<std::size_t>(n, 1));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (k < error_index) {
          error_index = k;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace zigzag
