#pragma once

#include <cstddef>
#include <functional>

namespace pollingkit {

/// Worker count for parallel loops: hardware concurrency, capped by the
/// POLLINGKIT_THREADS environment variable when it holds a positive integer.
unsigned concurrency_limit();

/// Runs body(i) for i in [0, n) on up to `workers` threads (0 means
/// concurrency_limit()). Indices are claimed dynamically, so callers must
/// write results by index. The first exception thrown by any body is
/// rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace pollingkit
