#pragma once

#include <cstddef>
#include <functional>

namespace mcjesp {

/// Logical core count, at least 1.
int default_workers();

/// Runs fn(0..n-1) on up to `workers` threads (inline when workers <= 1).
/// Task-to-thread assignment is dynamic, so callers must make each task's
/// result depend only on its index.  The first exception thrown is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace mcjesp
