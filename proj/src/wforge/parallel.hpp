#pragma once

#include <cstddef>
#include <functional>

namespace wforge {

/// Number of worker threads for lattice scans: WFORGE_THREADS if set (>=1),
/// otherwise the hardware concurrency.
int scan_threads();

/// Static block-partitioned parallel loop over [0, n). The body must write only
/// to disjoint slots (results are reduced by the caller afterwards, keeping all
/// reductions deterministic regardless of thread count).
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace wforge
