#pragma once

#include <cstddef>
#include <functional>

namespace htem {

/// Worker count: HTEM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Each index is visited exactly once, so results written to
/// per-index slots do not depend on the number of workers. If several
/// chunks throw, the exception from the lowest chunk is rethrown, which is
/// also independent of the worker count when each chunk stops at its first
/// failing index.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace htem
