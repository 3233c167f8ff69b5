// Index-parallel ensemble execution: an OpenMP path and a serial reference
// path with identical semantics. Results are written into slots owned by
// their index, so aggregation order — and therefore every output byte — is
// independent of the worker count.
#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace perpint {

enum class ExecMode { Serial, OpenMP };

template <class F>
void for_each_index(std::size_t n, int jobs, ExecMode mode, F&& f) {
#ifdef _OPENMP
    if (mode == ExecMode::OpenMP) {
        if (jobs <= 0) jobs = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            f(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)jobs;
    (void)mode;
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace perpint
