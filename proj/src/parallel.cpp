#include "fedsynth/parallel.hpp"

#include <omp.h>

namespace fedsynth {

namespace {
int default_threads() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

void set_threads(int threads) {
  const int fallback = default_threads();
  omp_set_num_threads(threads > 0 ? threads : fallback);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace fedsynth
