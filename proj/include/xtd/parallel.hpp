#pragma once

#include <cstddef>
#include <functional>

namespace xtd {

// Worker count: set_thread_count() wins, else XTD_THREADS, else 1.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Calls fn(i) for i in [0, n). Items are split into contiguous static chunks,
// so each index is always handled the same way regardless of timing. After
// all workers join, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace xtd
