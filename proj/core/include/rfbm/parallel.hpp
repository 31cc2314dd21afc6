#pragma once

#include <cstddef>
#include <functional>

namespace rfbm {

/// Worker count: RFBM_THREADS if set to a positive integer, else all cores.
std::size_t worker_count();

/// Calls body(i) for i in [0, n). Iterations are split into contiguous
/// chunks across workers; callers write results into per-index slots so the
/// outcome never depends on scheduling. Exceptions from any worker are
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rfbm
