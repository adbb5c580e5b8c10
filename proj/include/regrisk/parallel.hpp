#pragma once

#include <cstddef>
#include <functional>

namespace regrisk {

// requested > 0 wins; otherwise REGRISK_THREADS, otherwise 1.
int resolve_threads(int requested = 0);

// Runs body(index) for index in [0, count) on `threads` workers with static
// interleaved assignment. Exceptions from workers are rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace regrisk
