#pragma once

#include <functional>

namespace shearstab {

/// Runs fn(i) for every i in [0, count) on up to `threads` workers. Results
/// must be written to per-index slots by the caller so the outcome does not
/// depend on scheduling. If several calls throw, the exception of the lowest
/// index is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace shearstab
