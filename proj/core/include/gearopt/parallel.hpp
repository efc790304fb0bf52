#pragma once

#include <cstddef>
#include <functional>

namespace gearopt {

// Worker count honouring GEAROPT_THREADS (unset or 0 -> hardware concurrency).
std::size_t thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Indices are
// split into contiguous chunks; the first exception thrown is rethrown after
// all workers joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace gearopt
