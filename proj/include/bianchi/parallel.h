#pragma once

#include <cstddef>
#include <functional>

namespace bianchi {

/// Thread count: requested if positive, else BIANCHI_THREADS, else the hardware count.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers store results by
/// index and reduce them in index order, so outputs do not depend on the thread count.
/// The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace bianchi
