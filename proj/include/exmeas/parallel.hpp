#pragma once

#include <cstddef>
#include <functional>

namespace exmeas {

// Worker cap from the EXMEAS_THREADS environment variable (0 or unset = one
// worker per hardware thread). Read fresh on every call so a process may
// change it between runs.
unsigned worker_count();

// Runs fn(i) for every i in [0, n) across up to worker_count() threads.
// Callers write results into per-index slots, so the combined output does
// not depend on scheduling. Exceptions thrown by fn are rethrown on the
// calling thread (first one wins).
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace exmeas
