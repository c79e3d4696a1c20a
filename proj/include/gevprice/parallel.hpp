#pragma once

#include <cstddef>
#include <functional>

namespace gevprice {

/// Worker count: ROBUST_PRICING_THREADS if set and positive, otherwise the
/// hardware concurrency.
std::size_t thread_budget();

/// Runs body(i) for i in [0, n) on up to thread_budget() threads. Exceptions
/// from the body are rethrown on the caller (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gevprice
