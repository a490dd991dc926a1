#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stadloc {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must write
/// only to their own slot; the lowest-index exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, jobs > 1 ? static_cast<std::size_t>(jobs) : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stadloc
