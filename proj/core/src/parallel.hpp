#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace phaseless::detail {

inline std::size_t thread_count(int workers) {
  return static_cast<std::size_t>(std::clamp(workers, 1, 256));
}

// Runs fn(worker, index) for index in [0, count) on `workers` threads with a
// fixed round-robin assignment. The first failure by index order is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn fn) {
  const std::size_t nthreads = thread_count(workers);
  if (nthreads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(0, i);
    return;
  }
  std::vector<std::exception_ptr> errors(nthreads);
  std::vector<std::size_t> error_index(nthreads, count);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < nthreads; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += nthreads) {
        try {
          fn(w, i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  const auto first = std::min_element(error_index.begin(), error_index.end()) - error_index.begin();
  if (errors[static_cast<std::size_t>(first)]) std::rethrow_exception(errors[static_cast<std::size_t>(first)]);
}

}  // namespace phaseless::detail
