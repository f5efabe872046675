#pragma once

#include <cstddef>
#include <functional>

namespace heliopack {

/// Worker count: HELIOPACK_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Iterations are
/// handed out dynamically, so fn must write only to per-index state. The
/// first exception thrown by any iteration is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace heliopack
