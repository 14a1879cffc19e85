#include "xtd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "xtd/error.hpp"

namespace xtd {

namespace {
std::atomic<std::size_t> g_threads{0};
}

void set_thread_count(std::size_t n) {
  if (n < 1) fail(ErrorKind::config, "thread count must be >= 1");
  g_threads = n;
}

std::size_t thread_count() {
  if (g_threads > 0) return g_threads;
  if (const char* env = std::getenv("XTD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::config, std::string("XTD_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  // Keep the failure with the lowest index so the reported error does not
  // depend on scheduling.
  std::exception_ptr first;
  std::size_t first_index = n;
  std::mutex mu;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < first_index) {
            first_index = i;
            first = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace xtd
