#pragma once

#include <cstddef>
#include <functional>

namespace kgsumm::util {

// Worker count: RHGNN_SUMM_THREADS when set to a positive integer, else 1.
std::size_t default_threads();

// Runs fn(i) for i in [0, n) on up to `threads` threads. Each index runs
// exactly once; the first exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace kgsumm::util
