#pragma once

#include <cstddef>
#include <functional>

namespace culsim {

// Number of worker threads to use; 0 picks the hardware concurrency.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; callers own any reduction and must combine
// per-index results in a fixed order to stay deterministic across thread
// counts. Exceptions thrown by fn are rethrown on the calling thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace culsim
