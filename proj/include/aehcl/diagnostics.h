#ifndef AEHCL_DIAGNOSTICS_H_
#define AEHCL_DIAGNOSTICS_H_

#include <atomic>
#include <cstdint>
#include <string>

namespace aehcl {

// Process-wide counters for conditions that are handled rather than raised.
struct Diagnostics {
  std::atomic<std::uint64_t> zero_norm_cosine{0};
  std::atomic<std::uint64_t> corruption_fallback{0};
  std::atomic<std::uint64_t> corruption_skipped{0};
  std::atomic<std::uint64_t> injection_short_candidates{0};
  std::atomic<std::uint64_t> inter_event_excluded{0};
  std::atomic<std::uint64_t> neighbor_set_builds{0};

  void reset();
  std::string summary() const;
};

Diagnostics& diagnostics();

}  // namespace aehcl

#endif  // AEHCL_DIAGNOSTICS_H_
