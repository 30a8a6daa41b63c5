#pragma once

#include <cstdint>
#include <exception>
#include <limits>

namespace fedsynth {

/// Sets the OpenMP team size used by every parallel kernel; 0 restores the
/// runtime default. Results never depend on this value.
void set_threads(int threads);

/// Team size the kernels will currently use.
int max_threads();

/// Runs body(i) for i in [0, n) on the OpenMP team. Exceptions cannot leave
/// an OpenMP region, so the one thrown at the lowest index is captured and
/// rethrown afterwards; which error surfaces is independent of scheduling.
template <class Body>
void parallel_for(std::int64_t n, Body&& body) {
  std::exception_ptr first;
  std::int64_t first_index = std::numeric_limits<std::int64_t>::max();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(fedsynth_parallel_for)
      {
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

/// Same contract with dynamic scheduling, for uneven work items.
template <class Body>
void parallel_for_dynamic(std::int64_t n, Body&& body) {
  std::exception_ptr first;
  std::int64_t first_index = std::numeric_limits<std::int64_t>::max();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(fedsynth_parallel_for)
      {
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace fedsynth
