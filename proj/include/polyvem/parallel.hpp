#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace polyvem {

/// Worker count: POLYVEM_THREADS if set and positive, else the hardware
/// concurrency.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POLYVEM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) n = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return n;
}

/// Runs f(i) for i in [0, n) on contiguous blocks. f must only write to
/// slot-local state; results are therefore independent of the thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(1, n / 64));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace polyvem
