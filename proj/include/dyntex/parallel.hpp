#pragma once

#include <cstddef>
#include <functional>

namespace dyntex {

// Worker count: min(hardware_concurrency, DYNTEX_THREADS). A DYNTEX_THREADS
// value of 0 (or unset) means all cores.
std::size_t worker_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks,
// one per worker; fn must only write to locations owned by index i so the
// result is identical regardless of scheduling. Exceptions from workers
// are rethrown on the calling thread. Falls back to a plain loop when a
// single worker is active or n is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace dyntex
