#pragma once

#include <cstddef>
#include <functional>

namespace grfmask {

// Worker count used by parallel_for. Initialized from GRFMASK_THREADS when set,
// otherwise std::thread::hardware_concurrency().
std::size_t thread_count();
void set_thread_count(std::size_t threads);

// Calls body(index, worker) for index in [0, count). Indices are split into
// contiguous static chunks, one per worker, so callers that write index-addressed
// slots get results independent of the worker count. `worker` < thread_count()
// identifies per-worker scratch.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t index, std::size_t worker)>& body);

}  // namespace grfmask
