#pragma once

#include <cstddef>
#include <functional>

namespace msvr {

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs
// exactly once; the first exception is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

} // namespace msvr
