#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

namespace volkit {

/// Worker count: hardware concurrency, capped by the VOLKIT_THREADS environment variable.
inline std::size_t thread_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VOLKIT_THREADS")) {
    std::string_view s(env);
    std::size_t cap = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc{} && ptr == s.data() + s.size() && cap >= 1) n = cap;
  }
  return n;
}

/// Runs body(i) for i in [0, count). Work is split into contiguous blocks, one per worker.
/// Callers write results into per-index slots and reduce serially afterwards, which keeps
/// output independent of the worker count.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t workers = thread_count()) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t first = w * block;
    const std::size_t last = std::min(count, first + block);
    if (first >= last) break;
    pool.emplace_back([&, first, last] {
      try {
        for (std::size_t i = first; i < last; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace volkit
