#pragma once

#include <cstddef>
#include <functional>

namespace xaibench {

// Runs fn(0..count-1) on up to `workers` threads. Tasks must write to
// disjoint slots; the first exception is rethrown after all threads join.
// Results must not depend on scheduling, so worker count never changes
// output.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

} // namespace xaibench
