#pragma once

#include <cstddef>
#include <functional>

namespace bmcd {

/// Number of worker threads used by parallel_for (default: hardware concurrency).
int worker_count();
void set_worker_count(int jobs);

/// Calls body(i) for i in [0, count) over static contiguous blocks. Results must be written to
/// per-index slots so the outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bmcd
