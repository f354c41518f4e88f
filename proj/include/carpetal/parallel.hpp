#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace carpetal {

/// Runs fn(begin, end) over contiguous blocks of [0, count) on up to `workers`
/// threads. The first exception thrown by any block is rethrown on the caller.
template <typename Fn>
void parallel_blocks(std::size_t count, unsigned workers, Fn&& fn) {
  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  if (n_workers == 1) {
    if (count > 0) fn(std::size_t{0}, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(n_workers);
  const std::size_t chunk = (count + n_workers - 1) / n_workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  threads.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace carpetal
