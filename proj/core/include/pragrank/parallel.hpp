#pragma once

#include <atomic>
#include <cstddef>
#include <functional>

namespace pragrank {

// PRAGRANK_MAX_CONCURRENCY when set to a positive integer, else the hardware
// thread count (at least 1).
std::size_t default_concurrency();

// Runs fn(i) for every i in [0, n) on at most `workers` threads. Once `cancel`
// reads true no further indices are started. If any call throws, the
// remaining indices are skipped and the exception from the lowest failing
// index is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn,
                  const std::atomic<bool>* cancel = nullptr);

}  // namespace pragrank
