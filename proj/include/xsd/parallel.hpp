#pragma once

#include <cstddef>
#include <functional>

namespace xsd {

/// Worker cap: XSD_THREADS when set to a positive integer, otherwise the
/// hardware concurrency. Never affects results.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// writes only its own output slot; the first exception (lowest index) is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace xsd
