#pragma once

#include <cstddef>
#include <functional>

namespace bridgediag {

/// Worker count: BRIDGEDIAG_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(index, worker) for index in [0, n) on up to `workers` threads.
/// Indices are claimed dynamically, so callers must write results by index.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t index, std::size_t worker)>& body);

}  // namespace bridgediag
