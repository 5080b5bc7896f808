#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace vpdisp {

// Splits [0, n) into contiguous chunks, one per thread. Each index is visited
// exactly once and `body` must only write to per-index state, which keeps the
// result independent of the thread count.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body, std::size_t grain = 1024) {
  grain = std::max<std::size_t>(grain, 1);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>((n + grain - 1) / grain)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace vpdisp
