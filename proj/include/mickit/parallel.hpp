#pragma once

#include <cstddef>
#include <functional>

namespace mickit {

/// Worker threads to use: MICKIT_THREADS when set to a positive integer,
/// otherwise the hardware concurrency, never less than one.
std::size_t thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Results
/// must be written to per-index slots. The first exception by index is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace mickit
