#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace guidelab {

// Map-style loop over [0, n). threads == 1 runs the plain serial loop (the
// reference path); threads == 0 lets OpenMP pick; any other value caps the
// team size. Bodies must only write their own slot: reductions stay serial so
// results are bitwise identical for every thread count.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
    if (threads > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            body(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            body(static_cast<std::size_t>(i));
    }
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace guidelab
