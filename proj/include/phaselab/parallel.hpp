#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace phaselab {

namespace detail {
inline std::atomic<std::size_t>& thread_override() {
  static std::atomic<std::size_t> value{0};
  return value;
}
}  // namespace detail

// 0 restores the default: PHASELAB_THREADS if set, else hardware concurrency.
inline void set_thread_count(std::size_t n) { detail::thread_override().store(n); }

inline std::size_t thread_count() {
  if (const std::size_t n = detail::thread_override().load(); n > 0) return n;
  if (const char* env = std::getenv("PHASELAB_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs body(i) for every i in [0, count). Tasks must write only to slots owned
// by their index; callers reduce the slots in index order afterwards. If tasks
// throw, the exception from the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

// Splits [0, total) into `chunks` contiguous ranges. The split depends only on
// the arguments, never on the thread count.
struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

inline ChunkRange chunk_range(std::size_t total, std::size_t chunks, std::size_t index) {
  const std::size_t base = total / chunks;
  const std::size_t extra = total % chunks;
  const std::size_t begin = index * base + std::min(index, extra);
  return {begin, begin + base + (index < extra ? 1 : 0)};
}

}  // namespace phaselab
