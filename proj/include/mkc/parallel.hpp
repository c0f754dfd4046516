#pragma once

#include <cstddef>
#include <functional>

namespace mkc {

// Worker count from MKC_WORKERS, else the hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(begin, end) over fixed contiguous chunks of [0, n). Chunk
// boundaries depend only on n and the worker count, and every index is
// written by exactly one chunk, so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1024);

} // namespace mkc
