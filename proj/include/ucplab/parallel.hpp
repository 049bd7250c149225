#pragma once

#include <cstddef>
#include <functional>

namespace ucplab {

// Thread count from UCPLAB_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

// Runs body(i) for i in [0, count) on up to `threads` workers. Work is handed
// out by index; callers write results into slot i so the outcome does not
// depend on scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace ucplab
