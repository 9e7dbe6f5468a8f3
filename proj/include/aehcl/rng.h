#ifndef AEHCL_RNG_H_
#define AEHCL_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace aehcl {

// Seeded generator. Independent streams are derived from (seed, purpose,
// index) so that sampling for one purpose never perturbs another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t derive(std::uint64_t seed, std::string_view purpose,
                              std::uint64_t index = 0);
  static Rng stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0) {
    return Rng(derive(seed, purpose, index));
  }

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform real in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t poisson(double mean);

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aehcl

#endif  // AEHCL_RNG_H_
