#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace ngs {

// Worker count used when a caller passes threads <= 0.
int default_threads();
void set_default_threads(int threads);

// Calls fn(i) for i in [0, count) on up to `threads` worker threads. Exceptions from workers
// are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads = 0);

// Independent generator for (master seed, stream index); identical across thread schedules.
std::mt19937_64 stream_engine(std::uint64_t master, std::uint64_t stream);

}  // namespace ngs
