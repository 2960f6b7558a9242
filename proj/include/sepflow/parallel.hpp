#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace sepflow {

/// Worker count from SEPFLOW_THREADS, else the hardware concurrency; at least 1.
int thread_count();

/// Runs body(i) for i in [0, n). Indices are handed out dynamically, so body
/// must write only to slot i of any shared output. The first exception thrown
/// by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sepflow
