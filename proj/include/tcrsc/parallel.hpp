#pragma once

#include <cstddef>
#include <functional>

namespace tcrsc {

// Worker cap: hardware concurrency, bounded by the TCRSC_THREADS env var.
std::size_t worker_count();

// Runs fn(begin, end) over contiguous chunks of [0, n). Callers must write
// results to disjoint locations so the output is independent of scheduling.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace tcrsc
