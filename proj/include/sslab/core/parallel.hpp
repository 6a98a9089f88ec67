#pragma once

#include <cstddef>
#include <functional>

namespace sslab {

/// Worker count: explicit request if positive, else SSL_LAB_JOBS, else hardware concurrency.
int resolve_jobs(int requested = 0);

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Work is handed out in
/// index order; callers must write results by index so the outcome does not
/// depend on scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace sslab
