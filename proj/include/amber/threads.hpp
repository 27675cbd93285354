#pragma once

#include <cstddef>
#include <functional>

namespace amber {

// Worker cap: AMBER_THREADS env var if set, else hardware concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous index ranges, one
// per worker, so writes into per-index slots are race-free and results are
// identical for any worker count. Falls back to a plain loop for small n.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace amber
