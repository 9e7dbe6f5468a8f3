#ifndef AEHCL_PARALLEL_H_
#define AEHCL_PARALLEL_H_

#include <cstddef>

namespace aehcl {

// Kernels come in an OpenMP version and a plain serial reference.
enum class Execution { kSerial, kParallel };

// Bounds OpenMP worker count; values < 1 leave the runtime default.
void set_thread_count(int threads);
int thread_count();

// Work is split into this many fixed chunks regardless of thread count, and
// chunk results are reduced in chunk order, so parallel results do not depend
// on how many threads ran them.
inline constexpr std::size_t kReductionChunks = 16;

struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

inline ChunkRange chunk_range(std::size_t total, std::size_t chunk, std::size_t chunks) {
  return {total * chunk / chunks, total * (chunk + 1) / chunks};
}

}  // namespace aehcl

#endif  // AEHCL_PARALLEL_H_
