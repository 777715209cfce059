// Deterministic fan-out over indexed work items.
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rtlab {

/// Runs f(i) for i in [begin, end) on up to `workers` threads. Items are
/// independent and write to their own slots, so results never depend on the
/// worker count. The first exception thrown by any item is rethrown.
template <class F>
void parallel_for(std::uint64_t begin, std::uint64_t end, unsigned workers, F&& f) {
  if (end <= begin) return;
  const std::uint64_t n = end - begin;
  const unsigned w = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, n));
  if (w == 1) {
    for (std::uint64_t i = begin; i < end; ++i) f(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t i = begin + t; i < end; i += w) f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rtlab
