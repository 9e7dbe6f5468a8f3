#ifndef AEHCL_KMEANS_H_
#define AEHCL_KMEANS_H_

#include <cstdint>
#include <vector>

#include "aehcl/tensor.h"

namespace aehcl {

struct KMeansResult {
  std::vector<int> assignment;  // cluster id per row
  Tensor centroids;             // K x cols
  double sse = 0.0;
  int lloyd_iterations = 0;
};

// K-means++ seeding, Lloyd iterations until the assignment is a fixpoint (at
// most 100), then refinement by single-point moves and pair swaps (the latter
// for at most 2048 points) until neither lowers the SSE with all clusters
// non-empty. Repeated `restarts` times from derived
// seeds; the lowest SSE wins, the earliest on ties. Squared Euclidean
// distance; deterministic in (points, k, seed, restarts). Throws
// std::invalid_argument if k is not in [1, rows] or restarts < 1.
KMeansResult kmeans(const Tensor& points, int k, std::uint64_t seed, int restarts = 10);

double squared_distance(std::span<const double> a, std::span<const double> b);
double clustering_sse(const Tensor& points, const std::vector<int>& assignment, int k);

}  // namespace aehcl

#endif  // AEHCL_KMEANS_H_
