#pragma once

#include <cstdint>
#include <functional>

namespace maskfuse {

// 0 => hardware concurrency; always at least 1.
int resolve_threads(int requested);

// Runs body(i) for i in [0, count). Work items are claimed from an atomic
// counter, so outputs must be written to per-index slots; results are then
// independent of the thread count. The first exception thrown by a worker is
// rethrown after all threads join.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& body);

}  // namespace maskfuse
