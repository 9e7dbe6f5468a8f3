#include "aehcl/diagnostics.h"

#include <sstream>

namespace aehcl {

void Diagnostics::reset() {
  zero_norm_cosine = 0;
  corruption_fallback = 0;
  corruption_skipped = 0;
  injection_short_candidates = 0;
  inter_event_excluded = 0;
  neighbor_set_builds = 0;
}

std::string Diagnostics::summary() const {
  std::ostringstream out;
  out << "zero_norm_cosine=" << zero_norm_cosine.load()
      << " corruption_fallback=" << corruption_fallback.load()
      << " corruption_skipped=" << corruption_skipped.load()
      << " injection_short_candidates=" << injection_short_candidates.load()
      << " inter_event_excluded=" << inter_event_excluded.load()
      << " neighbor_set_builds=" << neighbor_set_builds.load();
  return out.str();
}

Diagnostics& diagnostics() {
  static Diagnostics instance;
  return instance;
}

}  // namespace aehcl
