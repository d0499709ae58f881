#pragma once
#include <cstddef>
#include <functional>

namespace dipolerad {

/// Worker-thread budget: DIPOLE_FLUX_THREADS if set (clamped to [1,256]),
/// otherwise hardware concurrency. Read once per process.
unsigned thread_budget();

/// Runs fn(begin, end) over [0, n) split into fixed-size chunks. Chunk
/// boundaries depend only on (n, chunk); threads pull chunks from an atomic
/// counter, so any per-chunk outputs are positionally deterministic
/// regardless of the thread count or schedule.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace dipolerad
