#pragma once

#include <cstddef>
#include <functional>

namespace forestprune {

/// Resolve a thread-count request: 0 means available hardware parallelism.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, count) over a fixed block partition: worker t owns
// a contiguous index range. Callers write results into per-index slots, so
// output never depends on the worker count. Exceptions from workers are
// rethrown on the calling thread (first by index order).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace forestprune
