#include "aehcl/parallel.h"

#include <omp.h>

namespace aehcl {

void set_thread_count(int threads) {
  if (threads >= 1) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace aehcl
