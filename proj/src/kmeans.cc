#include "aehcl/kmeans.h"

#include <algorithm>
#include <limits>
#include <utility>
#include <stdexcept>

#include "aehcl/rng.h"

namespace aehcl {
namespace {

constexpr int kMaxLloydIterations = 100;
// Pair swaps cost O(n^2) per pass; larger inputs use single moves only.
constexpr std::size_t kMaxSwapPoints = 2048;

void recompute_centroids(const Tensor& points, const std::vector<int>& assignment,
                         Tensor& centroids, std::vector<int>& counts) {
  centroids.fill(0.0);
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const int c = assignment[r];
    ++counts[c];
    auto dst = centroids.row(c);
    auto src = points.row(r);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    if (counts[c] == 0) continue;
    for (double& v : centroids.row(c)) v /= counts[c];
  }
}

int nearest_centroid(std::span<const double> point, const Tensor& centroids) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

// Moves single points while that lowers the SSE. Moving x from A to B changes
// the SSE by |B|/(|B|+1) |x-cB|^2 - |A|/(|A|-1) |x-cA|^2. Returns whether
// anything moved.
bool single_point_moves(const Tensor& points, int k, std::vector<int>& assignment, Tensor& centroids,
                        std::vector<int>& counts) {
  bool any = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t r = 0; r < points.rows(); ++r) {
      const int from = assignment[r];
      if (counts[from] <= 1) continue;
      const double na = counts[from];
      const double removal = na / (na - 1.0) * squared_distance(points.row(r), centroids.row(from));
      int best = from;
      double best_delta = 0.0;
      for (int to = 0; to < k; ++to) {
        if (to == from) continue;
        const double nb = counts[to];
        const double delta = nb / (nb + 1.0) * squared_distance(points.row(r), centroids.row(to)) - removal;
        if (delta < best_delta - 1e-12 * (1.0 + removal)) {
          best_delta = delta;
          best = to;
        }
      }
      if (best != from) {
        assignment[r] = best;
        recompute_centroids(points, assignment, centroids, counts);
        moved = any = true;
      }
    }
  }
  return any;
}

// Applies the first pair swap that lowers the SSE. Exchanging x in A with y
// in B changes the SSE by
//   |y-cA|^2 - |x-cA|^2 + |x-cB|^2 - |y-cB|^2 - |x-y|^2 (1/|A| + 1/|B|).
// Reaches partitions that single moves cannot, e.g. one 1-3 split of four
// points from another.
bool pair_swap(const Tensor& points, std::vector<int>& assignment, Tensor& centroids,
               std::vector<int>& counts) {
  const std::size_t n = points.rows();
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const int a = assignment[x], b = assignment[y];
      if (a == b) continue;
      const auto px = points.row(x), py = points.row(y);
      const double dxy = squared_distance(px, py);
      const double base = squared_distance(px, centroids.row(a)) + squared_distance(py, centroids.row(b));
      const double delta = squared_distance(py, centroids.row(a)) + squared_distance(px, centroids.row(b)) -
                           base - dxy * (1.0 / counts[a] + 1.0 / counts[b]);
      if (delta < -1e-12 * (1.0 + base)) {
        std::swap(assignment[x], assignment[y]);
        recompute_centroids(points, assignment, centroids, counts);
        return true;
      }
    }
  }
  return false;
}

Tensor seed_plus_plus(const Tensor& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  Tensor centroids(static_cast<std::size_t>(k), points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());

  std::size_t pick = rng.uniform_index(n);
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (std::size_t r = 0; r < n; ++r) total += dist[r];
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n;
        for (std::size_t r = 0; r < n; ++r) {
          if (dist[r] <= 0.0) continue;
          target -= dist[r];
          if (target < 0.0) {
            pick = r;
            break;
          }
        }
        if (pick == n) {
          for (std::size_t r = n; r-- > 0;) {
            if (dist[r] > 0.0) {
              pick = r;
              break;
            }
          }
        }
      } else {
        // Every remaining point coincides with a chosen centroid.
        std::vector<std::size_t> free;
        for (std::size_t r = 0; r < n; ++r) {
          if (!chosen[r]) free.push_back(r);
        }
        pick = free[rng.uniform_index(free.size())];
      }
    }
    chosen[pick] = true;
    auto src = points.row(pick);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    for (std::size_t r = 0; r < n; ++r) {
      dist[r] = std::min(dist[r], squared_distance(points.row(r), centroids.row(c)));
    }
  }
  return centroids;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

double clustering_sse(const Tensor& points, const std::vector<int>& assignment, int k) {
  Tensor centroids(static_cast<std::size_t>(k), points.cols());
  std::vector<int> counts(k, 0);
  recompute_centroids(points, assignment, centroids, counts);
  double sse = 0.0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    sse += squared_distance(points.row(r), centroids.row(assignment[r]));
  }
  return sse;
}

namespace {

KMeansResult kmeans_once(const Tensor& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  KMeansResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignment.assign(n, -1);
  std::vector<int> counts(k, 0);

  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (std::size_t r = 0; r < n; ++r) {
      const int c = nearest_centroid(points.row(r), result.centroids);
      if (c != result.assignment[r]) {
        result.assignment[r] = c;
        changed = true;
      }
    }
    result.lloyd_iterations = iter + 1;
    if (!changed) break;
    recompute_centroids(points, result.assignment, result.centroids, counts);
    // An emptied cluster takes the point farthest from its own centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double far_dist = -1.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (counts[result.assignment[r]] <= 1) continue;
        const double d =
            squared_distance(points.row(r), result.centroids.row(result.assignment[r]));
        if (d > far_dist) {
          far_dist = d;
          far = r;
        }
      }
      result.assignment[far] = c;
      recompute_centroids(points, result.assignment, result.centroids, counts);
    }
  }
  recompute_centroids(points, result.assignment, result.centroids, counts);

  while (single_point_moves(points, k, result.assignment, result.centroids, counts) ||
         (n <= kMaxSwapPoints && pair_swap(points, result.assignment, result.centroids, counts))) {
  }

  result.sse = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    result.sse += squared_distance(points.row(r), result.centroids.row(result.assignment[r]));
  }
  return result;
}

}  // namespace

KMeansResult kmeans(const Tensor& points, int k, std::uint64_t seed, int restarts) {
  const std::size_t n = points.rows();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("kmeans: K=" + std::to_string(k) + " but only " +
                                std::to_string(n) + " points");
  }
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
  KMeansResult best;
  for (int i = 0; i < restarts; ++i) {
    Rng rng(Rng::derive(seed, "kmeans", static_cast<std::uint64_t>(i)));
    KMeansResult run = kmeans_once(points, k, rng);
    if (i == 0 || run.sse < best.sse) best = std::move(run);
  }
  return best;
}

}  // namespace aehcl
