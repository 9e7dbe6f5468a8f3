#ifndef AEHCL_TESTS_FIXTURES_H_
#define AEHCL_TESTS_FIXTURES_H_

#include <filesystem>
#include <string>
#include <vector>

#include "aehcl/ahin.h"
#include "aehcl/intra_event.h"
#include "aehcl/rng.h"

namespace aehcl::testing {

// Random dataset: center type "q" plus `context_types` types, `nodes_per_type`
// nodes each, `events` events with 1..3 context nodes per type present.
EventDataset random_dataset(std::uint64_t seed, std::size_t events, std::size_t feature_width,
                            std::size_t context_types = 2, std::size_t nodes_per_type = 8);

// Two well-separated feature clusters; events never mix clusters.
EventDataset separable_dataset(std::uint64_t seed, std::size_t events, std::size_t feature_width);

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0);
Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0);
Rows as_rows(const std::vector<std::vector<double>>& v);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace aehcl::testing

#endif  // AEHCL_TESTS_FIXTURES_H_
