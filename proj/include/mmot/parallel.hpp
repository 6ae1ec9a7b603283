#pragma once

#include <cstddef>
#include <functional>

namespace mmot {

/// Worker cap for internal loops. Defaults to MMOT_THREADS when set, else 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
/// handled by exactly one call, so per-index results do not depend on the
/// worker count. Falls back to a single call for small `n * work_per_item`.
void parallel_for(std::size_t n, std::size_t work_per_item,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mmot
