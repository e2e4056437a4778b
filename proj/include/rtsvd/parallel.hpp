// Minimal slice-level work sharing.  Tasks must write to disjoint output
// slots; under that contract results do not depend on the worker count.

#pragma once

#include <cstddef>
#include <functional>

namespace rtsvd {

// Worker count used when a caller passes workers <= 0: the RTSVD_WORKERS
// environment variable if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int default_workers();

// Runs fn(0) .. fn(n - 1) on up to `workers` threads.  Indices are handed
// out through a shared counter, so scheduling is nondeterministic but the
// set of executed indices is not.  The first exception thrown by any task
// is rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

} // namespace rtsvd
