#ifndef AEHCL_INTER_EVENT_H_
#define AEHCL_INTER_EVENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aehcl/ahin.h"
#include "aehcl/encoder.h"
#include "aehcl/intra_event.h"
#include "aehcl/parallel.h"
#include "aehcl/rng.h"

namespace aehcl {

struct EventRepresentation {
  std::vector<double> c_in;     // attention-aggregated context, length d
  std::vector<double> e;        // c_in followed by the center z, length 2d
  std::vector<double> weights;  // attention weight per context row, caller's order
};

struct InterAttentionCache {
  std::vector<std::size_t> order;  // canonical row order
  Tensor keys;                     // canonical order
  std::vector<double> logits_pre;  // k_j . z_q before the activation
  std::vector<double> weights;     // canonical order
};

// k_j = P_{type_j} z_j, alpha = softmax(act(k_j . z_q)), c_in = sum alpha_j z_j,
// e = c_in || z_q. Context rows are reduced in a canonical order, so the
// output is bit-identical under permutation of the context.
EventRepresentation event_representation(ConstVec center, const Rows& context,
                                         const std::vector<TypeId>& context_types,
                                         const ParameterStore& params, const ModelLayout& layout,
                                         InterAttentionCache* cache = nullptr);

// Accumulates gradients given de (length 2d).
void event_representation_backward(ConstVec center, const Rows& context,
                                   const std::vector<TypeId>& context_types,
                                   const ParameterStore& params, const ModelLayout& layout,
                                   const InterAttentionCache& cache, ConstVec de, MutVec dcenter,
                                   std::vector<std::vector<double>>& dcontext, GradientSet& grads);

// sigmoid(e_a^T W_in e_b).
double inter_event_score(ConstVec e_a, ConstVec e_b, const Tensor& w_in);

// Positive and negative neighbor events of every event.
//   positives(i) = { j != i : metapath_count(i, j) > t_pos }
//   negatives(i) = { j != i : shared_node_count(i, j) < t_neg }
// Positives are stored explicitly. Negatives are usually almost every event,
// so the complement ("blocked": j != i with shared_node_count >= t_neg) is
// stored instead.
class NeighborSets {
 public:
  NeighborSets() = default;
  NeighborSets(std::size_t events, int t_pos, int t_neg);

  std::size_t event_count() const { return positives_.size(); }
  int t_pos() const { return t_pos_; }
  int t_neg() const { return t_neg_; }

  const std::vector<std::uint32_t>& positives(std::size_t i) const { return positives_[i]; }
  const std::vector<std::uint32_t>& blocked(std::size_t i) const { return blocked_[i]; }
  std::vector<std::uint32_t>& mutable_positives(std::size_t i) { return positives_[i]; }
  std::vector<std::uint32_t>& mutable_blocked(std::size_t i) { return blocked_[i]; }

  bool is_positive(std::size_t i, std::size_t j) const;
  bool is_negative(std::size_t i, std::size_t j) const;
  std::size_t negative_count(std::size_t i) const;
  std::vector<std::uint32_t> negatives(std::size_t i) const;
  // Both sets non-empty.
  bool participates(std::size_t i) const;
  std::size_t participant_count() const;

  std::uint32_t sample_positive(std::size_t i, Rng& rng) const;
  std::uint32_t sample_negative(std::size_t i, Rng& rng) const;

  friend bool operator==(const NeighborSets&, const NeighborSets&) = default;

 private:
  int t_pos_ = 1;
  int t_neg_ = 1;
  std::vector<std::vector<std::uint32_t>> positives_;
  std::vector<std::vector<std::uint32_t>> blocked_;
};

// Inverted-index construction; the parallel version splits events across
// threads, the serial version is a plain all-pairs scan kept as reference.
NeighborSets build_neighbor_sets(const EventDataset& dataset, int t_pos, int t_neg,
                                 Execution execution = Execution::kParallel);

// Cache file: header line `aehcl-neighbors<TAB>1<TAB>t_pos<TAB>t_neg<TAB>m`,
// then one line per event `event_id<TAB>positive ids<TAB>blocked ids` with
// comma-separated external event ids.
void save_neighbor_sets(const std::string& path, const EventDataset& dataset,
                        const NeighborSets& sets);
NeighborSets load_neighbor_sets(const std::string& path, const EventDataset& dataset);

struct InterEventLoss {
  double loss = 0.0;
  std::size_t participants = 0;
  std::size_t excluded = 0;
};

// Mean BCE over events having both a positive and a negative neighbor; one
// positive and one negative are drawn per event. Throws std::runtime_error if
// no event qualifies.
InterEventLoss inter_event_loss(const NeighborSets& sets,
                                const std::vector<EventRepresentation>& representations,
                                const Tensor& w_in, Rng& rng);

}  // namespace aehcl

#endif  // AEHCL_INTER_EVENT_H_
