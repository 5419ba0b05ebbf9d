#pragma once

// OpenMP pragmas expand to nothing when the build has no OpenMP.
#if defined(_OPENMP)
#include <omp.h>
#define PMT_PRAGMA(x) _Pragma(#x)
#define PMT_OMP_FOR PMT_PRAGMA(omp parallel for schedule(static))
#define PMT_OMP_FOR_REDUCE_SUM(var) PMT_PRAGMA(omp parallel for schedule(static) reduction(+ : var))
#define PMT_OMP_FOR_REDUCE_MAX(var) PMT_PRAGMA(omp parallel for schedule(static) reduction(max : var))
#else
#define PMT_OMP_FOR
#define PMT_OMP_FOR_REDUCE_SUM(var)
#define PMT_OMP_FOR_REDUCE_MAX(var)
#endif

namespace pmt {

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pmt
