#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace neuroskin {

/// Runs task(i) for i in [0, count) on at most `workers` threads and returns
/// one exception slot per index (null when the task succeeded). Tasks must
/// write their results into caller-owned, index-addressed storage.
template <typename Task>
std::vector<std::exception_ptr> run_indexed(std::size_t count, std::size_t workers, Task&& task) {
  std::vector<std::exception_ptr> errors(count);
  if (count == 0) return errors;
  workers = std::clamp<std::size_t>(workers, 1, count);

  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    drain();
    return errors;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  pool.clear();  // joins
  return errors;
}

}  // namespace neuroskin
