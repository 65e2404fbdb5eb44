#pragma once

#include <functional>

namespace sparseg {

// Worker count: hardware concurrency, capped by the SPARSEG_THREADS
// environment variable when set (values < 1 mean serial).
int worker_count();

// Runs fn(i) for i in [0, n). Iterations must be independent; results are
// deterministic because each index writes only its own outputs.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace sparseg
