// Worker-count policy shared by every parallel loop. Parallelism only
// changes wall time, never output bytes: each loop writes into
// preallocated per-item slots and the merge order is fixed.

#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pinsynth {

/// Maps a --jobs value to a thread count: 0 means all hardware threads,
/// anything positive is taken literally. Builds without OpenMP run serial
/// regardless.
inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
  return jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
  return 1;
#endif
}

}  // namespace pinsynth
