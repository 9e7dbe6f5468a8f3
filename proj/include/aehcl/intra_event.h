#ifndef AEHCL_INTRA_EVENT_H_
#define AEHCL_INTRA_EVENT_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aehcl/ahin.h"
#include "aehcl/numerics.h"
#include "aehcl/rng.h"
#include "aehcl/tensor.h"

namespace aehcl {

using Rows = std::vector<ConstVec>;

// ---------------------------------------------------------------------------
// Pair-wise module

// Negatives for every anchor of one event, anchors in event_nodes() order.
// Positives are implicit: the other nodes of the event.
struct PairwiseBatchPlan {
  std::size_t event = 0;
  std::vector<std::vector<NodeId>> negatives;
  double temperature = 1.0;
};

// Draws `n` negatives per anchor uniformly (with replacement) from the nodes
// outside the event, of any type.
PairwiseBatchPlan sample_pairwise_plan(const EventDataset& dataset, std::size_t event,
                                       std::size_t n, double temperature, Rng& rng);

struct PairwiseGrads {
  std::vector<double> anchor;
  std::vector<std::vector<double>> positives;
  std::vector<std::vector<double>> negatives;
};

// -log( sum_pos exp(sim/tau) / sum_{pos,neg} exp(sim/tau) ) for one anchor.
// `grads` (optional) receives d loss / d row for the anchor and every row.
// Throws std::invalid_argument on an empty positive set or tau <= 0.
double pairwise_loss_node(ConstVec anchor, const Rows& positives, const Rows& negatives,
                          double temperature, PairwiseGrads* grads = nullptr);

// Sum over anchors within each event, mean over the planned events.
// `embeddings` is indexed by node id.
double pairwise_loss(const EventDataset& dataset, const Tensor& embeddings,
                     const std::vector<PairwiseBatchPlan>& plans);

// ---------------------------------------------------------------------------
// Multivariate module

struct AttentionCache {
  std::vector<std::size_t> order;  // canonical row order used for the computation
  Tensor query, key, value, weights, output;
  std::vector<std::size_t> argmax;  // winning canonical row per dimension
};

// Single-head scaled dot-product self-attention over the context rows,
// followed by elementwise max-pooling. Rows are processed in a canonical
// (lexicographic) order so the result is bit-identical under permutation.
std::vector<double> multivariate_context(const Rows& context, const Tensor& query,
                                         const Tensor& key, const Tensor& value,
                                         AttentionCache* cache = nullptr);

// dcontext[j] (sized like context, in the caller's order) and the projection
// gradients are accumulated.
void multivariate_context_backward(const Rows& context, const Tensor& query, const Tensor& key,
                                   const Tensor& value, const AttentionCache& cache,
                                   ConstVec dpooled, std::vector<std::vector<double>>& dcontext,
                                   Tensor& dquery, Tensor& dkey, Tensor& dvalue);

// sigmoid(h^T W c).
double multivariate_score(ConstVec center, ConstVec context, const Tensor& w_mu);

// Gradient of u^T W v scaled by dlogit, accumulated into du, dv, dw.
void bilinear_backward(ConstVec u, ConstVec v, const Tensor& w, double dlogit, MutVec du,
                       MutVec dv, Tensor& dw);

// -(1/m) sum [log s + log(1 - s~)], scores clamped to [1e-7, 1-1e-7].
double multivariate_loss(ConstVec positive_scores, ConstVec negative_scores);

// ---------------------------------------------------------------------------
// Negative contexts

// K-means clusters over raw features, computed per context type.
struct NodeClusters {
  std::vector<int> cluster;                               // per node; -1 for center nodes
  std::vector<std::vector<std::vector<NodeId>>> members;  // [type][cluster]

  std::size_t type_size(TypeId t) const;
};

// K is capped at the number of nodes of each type.
NodeClusters cluster_nodes(const Ahin& ahin, int k, std::uint64_t seed);

struct CorruptedContext {
  std::size_t event = 0;
  std::size_t position = 0;  // index into Event::context
  NodeId original = 0;
  NodeId replacement = 0;
  int original_cluster = -1;
  int replacement_cluster = -1;
  bool fallback = false;  // no same-type node in another cluster was available
};

// One replacement per context type present in the event (types ascending):
// a uniformly chosen context node of that type is swapped for a uniformly
// chosen same-type node from a different cluster and outside the event.
std::vector<CorruptedContext> corrupt_context(const Event& event, std::size_t event_index,
                                              const Ahin& ahin, const NodeClusters& clusters,
                                              Rng& rng);

std::vector<NodeId> apply_corruption(const Event& event,
                                     const std::vector<CorruptedContext>& corruption);

}  // namespace aehcl

#endif  // AEHCL_INTRA_EVENT_H_
