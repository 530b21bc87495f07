#pragma once

#include <cstddef>
#include <functional>

namespace sgdlab {

/// Worker count: LAB_THREADS when set (>= 1), else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Work is
/// split by index, so any per-index output is independent of the thread
/// count. The first exception thrown by a task is rethrown after all
/// workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sgdlab
