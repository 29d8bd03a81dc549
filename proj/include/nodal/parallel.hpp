#pragma once

namespace nodal {

// Worker count for OpenMP regions: omp_get_max_threads(), capped by the
// NODAL_SHEET_THREADS environment variable when it is set.
int worker_count();

// Re-reads NODAL_SHEET_THREADS and applies it to the OpenMP runtime.
void apply_thread_cap();

}  // namespace nodal
