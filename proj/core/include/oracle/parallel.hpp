#pragma once

#include <cstddef>
#include <functional>

namespace oracle {

// Worker count: hardware concurrency, capped by the ORACLE_LAB_THREADS
// environment variable when set. Always >= 1. Read once per process.
int worker_count();

// Runs fn(i) for i in [0, n). Tasks must write to disjoint state; the
// index->task mapping is fixed, so results do not depend on scheduling
// or on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace oracle
