// SPDX-License-Identifier: Apache-2.0
#include "mmw/threading.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mmw {

namespace {
unsigned g_max_threads = 0;

unsigned hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}
}  // namespace

void set_max_threads(unsigned n) { g_max_threads = n; }

unsigned max_threads() { return g_max_threads == 0 ? hardware_threads() : g_max_threads; }

void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
  if (count == 0) return;
  size_t workers = max_threads();
  if (workers > count) workers = count;
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    for (;;) {
      size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mmw
