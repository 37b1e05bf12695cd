#pragma once

#include <cstddef>
#include <functional>

namespace resv {

/// Worker count: hardware concurrency capped by RESV_SYNC_THREADS when set.
[[nodiscard]] unsigned worker_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous blocks, so
/// results written by index are independent of the thread count.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

} // namespace resv
