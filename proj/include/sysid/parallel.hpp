#pragma once

#include <cstddef>

#include <omp.h>

namespace sysid {

// Single knob for every data-parallel loop in the library. The serial path
// (parallel = false) is the reference implementation; outputs are written to
// disjoint index slots, so the OpenMP path must match it bitwise. The
// benchmark target compares the two.
template <typename Fn>
void parallel_for(std::size_t n, bool parallel, Fn&& fn) {
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(n); ++i) fn(static_cast<std::size_t>(i));
}

inline void set_thread_count(int k) {
  if (k > 0) omp_set_num_threads(k);
}

}  // namespace sysid
