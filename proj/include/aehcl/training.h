#ifndef AEHCL_TRAINING_H_
#define AEHCL_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aehcl/ahin.h"
#include "aehcl/config.h"
#include "aehcl/encoder.h"
#include "aehcl/inter_event.h"
#include "aehcl/intra_event.h"
#include "aehcl/parallel.h"
#include "aehcl/parameter_store.h"

namespace aehcl {

enum class LrDecayMode {
  kPairwiseGroup,  // decay the encoder (the pair-wise module's parameters) every run
  kPairwiseOnly,   // default: decay everything, but only when alpha is the sole active weight
  kNone,
};

struct ModuleWeights {
  double alpha = 1.0;
  double beta = 0.8;
  double gamma = 0.2;
};

// Weight presets: "aminer" {1, 0.8, 0.2}, "imdb" {1, 0.1, 0.1},
// "meituan" {0.5, 1, 0.3}.
ModuleWeights weight_preset(const std::string& name);

struct TrainConfig {
  std::size_t hidden = 64;
  double temperature = 1.0;
  std::size_t negatives = 10;
  ModuleWeights weights;
  int t_pos = 1;
  int t_neg = 1;
  int clusters = 10;
  double learning_rate = 1e-3;
  double lr_decay = 0.5;
  std::size_t lr_decay_every = 2;
  LrDecayMode lr_decay_mode = LrDecayMode::kPairwiseOnly;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  Activation activation = Activation::kElu;
  // Sampled coordinates for a gradient check before training; 0 skips it.
  std::size_t grad_check_coordinates = 0;

  void validate() const;
  // Applies one documented key; throws ValidationError on unknown keys.
  void set(const std::string& key, const std::string& value);
  void apply(const KeyValues& values);
  std::string to_text() const;
};

double total_loss(double pairwise, double multivariate, double inter, const ModuleWeights& w);

// Everything besides parameters that a forward pass needs. Clusters are only
// built when beta > 0, neighbor sets only when gamma > 0.
struct ModelContext {
  const EventDataset* dataset = nullptr;
  ModelLayout layout;
  TrainConfig config;
  std::optional<NodeClusters> clusters;
  std::optional<NeighborSets> neighbors;
};

ModelContext make_model_context(const EventDataset& dataset, const TrainConfig& config,
                                const ModelLayout& layout,
                                Execution execution = Execution::kParallel,
                                const NeighborSets* precomputed_neighbors = nullptr);

// Samples drawn for one event in one training step.
struct EventDraw {
  std::size_t event = 0;
  std::vector<std::vector<NodeId>> negatives;  // per anchor, event_nodes() order
  std::vector<NodeId> corrupted_context;
  std::int64_t positive_event = -1;
  std::int64_t negative_event = -1;

  bool has_inter() const { return positive_event >= 0 && negative_event >= 0; }
};

struct BatchPlan {
  std::vector<EventDraw> draws;
};

// Negatives, corrupted contexts and inter-event neighbors each come from
// their own stream derived from (seed, purpose, step).
BatchPlan sample_batch_plan(const ModelContext& ctx, std::span<const std::size_t> events,
                            std::uint64_t seed, std::uint64_t step);

struct BatchLoss {
  double pairwise = 0.0;      // mean over events of the per-event anchor sum
  double multivariate = 0.0;  // mean BCE
  double inter = 0.0;         // mean BCE over events with inter-event draws
  std::size_t events = 0;
  std::size_t inter_events = 0;
  double total = 0.0;
};

// Loss of one batch and, if `grads` is non-null, its gradient (overwriting
// `grads`, which must be shaped like `params`). The parallel version splits
// events into kReductionChunks fixed chunks and reduces them in order; the
// serial version is a single loop kept as the reference.
BatchLoss batch_forward_backward(const ModelContext& ctx, const ParameterStore& params,
                                 const BatchPlan& plan, GradientSet* grads,
                                 Execution execution = Execution::kParallel);

// Node embeddings for a set of nodes.
struct NodeEmbeddings {
  std::vector<NodeId> nodes;
  std::vector<int> local;  // node id -> row, -1 if absent
  Tensor pre;              // pre-activation
  Tensor z;

  ConstVec row(NodeId v) const { return z.row(static_cast<std::size_t>(local[v])); }
};

NodeEmbeddings encode_nodes(const ModelContext& ctx, const ParameterStore& params,
                            std::vector<NodeId> nodes, Execution execution);
NodeEmbeddings encode_all_nodes(const ModelContext& ctx, const ParameterStore& params,
                                Execution execution);

struct EpochStats {
  std::size_t epoch = 0;
  double total = 0.0;
  double pairwise = 0.0;
  double multivariate = 0.0;
  double inter = 0.0;
  double pairwise_lr = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::optional<double> grad_check_error;
  double wall_seconds = 0.0;
  std::string checkpoint_path;
  bool neighbor_sets_built = false;
  std::size_t inter_participants = 0;
};

// One JSON object per epoch line.
std::string report_to_jsonl(const TrainReport& report);

struct TrainOptions {
  Execution execution = Execution::kParallel;
  std::string checkpoint_path;  // written at the end, or on abort
  const NeighborSets* neighbors = nullptr;  // e.g. loaded from a cache file
  std::function<void(const EpochStats&)> on_epoch;
};

class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, TrainReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

struct TrainResult {
  ParameterStore params;
  ModelLayout layout;
  TrainReport report;
};

// Joint optimization of alpha*L_pa + beta*L_mu + gamma*L_in with Adam.
TrainResult train(const EventDataset& dataset, const TrainConfig& config,
                  const TrainOptions& options = {});

}  // namespace aehcl

#endif  // AEHCL_TRAINING_H_
