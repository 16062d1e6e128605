#pragma once

#include <cstddef>
#include <functional>

namespace dualgap {

// Worker count: DUALGAP_THREADS if set and positive, else hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n). Callers write results into slot i, so output
// order never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dualgap
