#pragma once

#include <cstddef>
#include <functional>

namespace regsum {

/// Worker cap from REGSUM_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; fn must only write state owned by its index. The
/// first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace regsum
