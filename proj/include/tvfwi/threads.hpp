#pragma once

namespace tvfwi {

// Reads TVFWI_THREADS and caps the worker-thread count; 0 or unset means
// use all available cores. Call once at process start.
void apply_thread_cap();

int max_threads();

}  // namespace tvfwi
