#pragma once

#include <cstddef>
#include <functional>

namespace fieldctl {

/// Worker count used by the row/point loops. 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on each,
/// one chunk per worker. The first exception thrown by any chunk is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fieldctl
