#include "nodal/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace nodal {

namespace {
int env_cap() {
  const char* v = std::getenv("NODAL_SHEET_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    return std::max(1, std::stoi(v));
  } catch (...) {
    return 0;
  }
}
}  // namespace

int worker_count() {
  const int cap = env_cap();
  const int max_threads = omp_get_max_threads();
  return cap > 0 ? std::min(cap, max_threads) : max_threads;
}

void apply_thread_cap() {
  const int cap = env_cap();
  if (cap > 0) omp_set_num_threads(cap);
}

}  // namespace nodal
