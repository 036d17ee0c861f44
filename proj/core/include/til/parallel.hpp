#pragma once

#include <functional>

namespace til {

// Worker cap: TIL_THREADS when set, hardware concurrency otherwise.
int worker_count();

// Runs fn(i) for i in [begin, end) on up to worker_count() threads with
// static chunking. Callers own determinism: write results into per-index
// slots and reduce in index order afterwards.
void parallel_for(long begin, long end, const std::function<void(long)>& fn);

}  // namespace til
