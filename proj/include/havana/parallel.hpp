#pragma once

#include <cstdint>
#include <functional>

namespace havana {

/// Process-wide worker count for intra-step parallel loops. Defaults to 1.
int thread_count();
void set_thread_count(int n);

/// Run f(i) for i in [0, n). When thread_count() > 1 the range is split into
/// contiguous chunks, one thread each; every i writes only its own outputs, so
/// results are identical for any worker count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f);

}  // namespace havana
