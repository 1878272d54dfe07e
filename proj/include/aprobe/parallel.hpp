#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace aprobe {

// Runs fn(i) for i in [0, n). With workers > 1 the iterations are spread
// over an OpenMP team; otherwise they run in order on the calling thread.
// The serial path is the reference the parallel one is tested against.
// Every exception is captured; the one from the lowest index is rethrown
// after all iterations finish.
template <typename Fn>
void for_each_index(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace aprobe
