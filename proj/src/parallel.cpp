#include "mmot/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mmot {

namespace {

std::size_t initial_thread_count() {
  if (const char* env = std::getenv("MMOT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) {
        return static_cast<std::size_t>(v);
      }
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::atomic<std::size_t>& thread_setting() {
  static std::atomic<std::size_t> n{initial_thread_count()};
  return n;
}

constexpr std::size_t kMinWorkPerThread = 1u << 16;

}  // namespace

std::size_t thread_count() { return thread_setting().load(); }

void set_thread_count(std::size_t n) { thread_setting().store(std::max<std::size_t>(n, 1)); }

void parallel_for(std::size_t n, std::size_t work_per_item,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers =
      std::min({thread_count(), n, std::max<std::size_t>(1, n * work_per_item / kMinWorkPerThread)});
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) {
      pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
  }
  body(0, std::min(n, chunk));
  for (auto& t : pool) {
    t.join();
  }
}

}  // namespace mmot
