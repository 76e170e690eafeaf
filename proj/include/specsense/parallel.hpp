#pragma once

#include <cstddef>
#include <functional>

namespace specsense {

/// Thread cap for parallel sections; 0 means the available hardware parallelism.
void set_thread_limit(unsigned threads) noexcept;
unsigned thread_limit() noexcept;

/// Calls fn(i) for i in [0, n) on up to thread_limit() threads, each taking one contiguous block.
/// Results must be written to per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any worker is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace specsense
