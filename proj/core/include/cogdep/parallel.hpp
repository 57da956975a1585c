#pragma once

#include <cstddef>
#include <functional>

namespace cogdep {

// Process-wide cap on worker threads. Defaults to hardware concurrency.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

// Calls fn(i) for i in [0, n). Work is split into contiguous blocks; every
// index is visited exactly once, so callers that write only slot i get
// results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cogdep
