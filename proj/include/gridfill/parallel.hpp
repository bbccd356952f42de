#pragma once

#include <cstddef>
#include <functional>

namespace gridfill {

/// Worker count: GRIDFILL_THREADS if set (>= 1), else the hardware count.
std::size_t thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads. Each index
/// runs exactly once; callers write results into per-index slots and reduce
/// in index order, so output does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Keeps large freed blocks in the heap instead of returning them to the
/// OS (glibc only). Training reallocates the same large buffers every step,
/// and re-faulting fresh pages otherwise costs as much as the arithmetic.
/// Safe to call repeatedly.
void configure_allocator();

}  // namespace gridfill
