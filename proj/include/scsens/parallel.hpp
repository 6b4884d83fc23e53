#pragma once

#include <cstddef>
#include <functional>

namespace scsens {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// default (hardware concurrency).
void set_workers(unsigned n);
unsigned workers();

/// Runs body(i) for i in [0, n). Calls issued from inside a worker run
/// serially, so nested loops never oversubscribe. If any body throws, the
/// exception from the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace scsens
