#pragma once

#include <cstddef>
#include <functional>

namespace infogeo {

/// Worker count: INFOGEO_THREADS if set (>= 1), else the hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Results must be
/// written to per-index slots by the caller; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace infogeo
