#pragma once

#include <functional>

namespace omnistereo {

// Worker count: min(OMNISTEREO_THREADS, hardware concurrency), where an unset
// or zero variable means hardware concurrency.
int thread_budget();

// Runs fn(i) for every i in [0, n), possibly across threads. fn must only
// write to state owned by index i, so results are identical to a serial loop.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace omnistereo
