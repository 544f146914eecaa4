#include "tvfwi/threads.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tvfwi {

void apply_thread_cap() {
#ifdef _OPENMP
    const char* env = std::getenv("TVFWI_THREADS");
    if (!env) return;
    int n = 0;
    try {
        n = std::stoi(env);
    } catch (const std::exception&) {
        return;  // malformed value, keep the default
    }
    if (n > 0) omp_set_num_threads(n);
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace tvfwi
