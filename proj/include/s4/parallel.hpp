#pragma once

#include <functional>

namespace s4 {

// Worker count from S4_THREADS (>=1), defaulting to min(hardware, 8).
int worker_count();

// Static block partition of [0, n) over worker_count() threads. Callers that
// need bitwise-reproducible results write to per-index slots and reduce in
// index order afterwards, so the partitioning never affects output bytes.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace s4
