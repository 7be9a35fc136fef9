#pragma once

#include <cstddef>
#include <functional>

namespace platelab {

/// Worker count: PLATE_LAB_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads.
/// Each index is processed exactly once; callers write to disjoint slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace platelab
