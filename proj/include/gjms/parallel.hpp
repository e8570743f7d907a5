#pragma once

#include <cstddef>
#include <functional>

namespace gjms {

/// Worker count: GJMS_LAB_THREADS if set and positive, otherwise hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, count); each index is independent so results do not
/// depend on the number of workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gjms
