#pragma once

#include <cstdint>
#include <functional>

namespace mixstyle {

// Runs fn(i) for i in [0, n). Each index is processed exactly once; indices
// are sharded across `threads` workers (<= 0 means hardware concurrency).
// Results must be written to per-index slots by the caller, which keeps
// output independent of the thread count.
void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn);

int resolve_threads(int threads);

}  // namespace mixstyle
