#ifndef AEHCL_DETECTION_H_
#define AEHCL_DETECTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aehcl/training.h"

namespace aehcl {

enum class PairwiseMode { kMin, kAvg, kStd, kLoss };
enum class BilinearMode { kPos, kNeg, kPosAndNeg };

struct ScoreVariant {
  PairwiseMode pairwise = PairwiseMode::kMin;
  BilinearMode bilinear = BilinearMode::kPos;

  friend bool operator==(const ScoreVariant&, const ScoreVariant&) = default;
};

// "<pairwise>[:<bilinear>]", e.g. "min", "avg:neg", "std:pos_and_neg".
// A lone bilinear mode ("neg") keeps the default pairwise mode.
ScoreVariant parse_variant(const std::string& text);
std::string variant_name(const ScoreVariant& variant);

// Larger component means more normal for every mode: min and avg of pair
// cosine similarities, the negated standard deviation, or the negated
// largest per-node contrastive loss (which needs `negatives` per node in the
// same order as `nodes`). Throws ValidationError with fewer than 2 nodes.
double pairwise_component(const Rows& nodes, PairwiseMode mode,
                          const std::vector<Rows>* negatives = nullptr,
                          double temperature = 1.0);

// -(alpha * pairwise + beta * s_mu + gamma * s_in); higher is more anomalous.
double combine_score(double pairwise, double s_mu, double s_in, const ModuleWeights& w);

struct ScoreOptions {
  ModuleWeights weights;
  ScoreVariant variant;
  std::uint64_t seed = 0;
  std::size_t max_neighbors = 64;  // inter-event neighbors averaged per event
  std::size_t negatives = 10;      // for the "loss" pairwise mode
  double temperature = 1.0;
  int clusters = 10;
  int t_pos = 1;
  int t_neg = 1;
  Execution execution = Execution::kParallel;
  const NeighborSets* neighbors = nullptr;  // built from t_pos/t_neg when null
};

struct EventScore {
  std::string event_id;
  double total = 0.0;
  double pairwise = 0.0;
  double s_mu = 0.0;
  double s_in = 0.0;
  std::size_t rank = 0;  // 1 = most anomalous
  bool s_in_imputed = false;
};

struct ScoreReport {
  std::vector<EventScore> events;
  ScoreVariant variant;
  ModuleWeights weights;
  std::string checkpoint_id;

  std::vector<double> totals() const;
};

// Scores every event. Terms whose weight is zero are not computed and
// reported as 0. Events without inter-event neighbors get the mean of the
// computed s_in values (0.5 if there are none).
ScoreReport score_events(const EventDataset& dataset, const ParameterStore& params,
                         const ModelLayout& layout, const ScoreOptions& options);

// Ranks 1..m by descending score; ties keep input order.
std::vector<std::size_t> rank_scores(const std::vector<double>& scores);

// `event_id<TAB>total<TAB>pairwise<TAB>s_mu<TAB>s_in<TAB>rank`, preceded by
// '#' metadata lines.
void write_score_report(const std::string& path, const ScoreReport& report);
ScoreReport read_score_report(const std::string& path);

// AP over the descending ranking, ties in input order. Throws
// std::invalid_argument without positives or on a length mismatch.
double average_precision(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);
// P(pos > neg) + P(tie) / 2. Throws std::invalid_argument on single-class labels.
double roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

// Indices with score >= threshold.
std::vector<std::size_t> detect(const std::vector<double>& scores, double threshold);
// Threshold at the top `fraction` of events; ties at the threshold included.
std::vector<std::size_t> detect_top_fraction(const std::vector<double>& scores, double fraction);

struct ThresholdChoice {
  double threshold = 0.0;
  double f1 = 0.0;
};
// Evaluation only: the score threshold maximizing F1 against labels.
ThresholdChoice f1_optimal_threshold(const std::vector<double>& scores,
                                     const std::vector<std::uint8_t>& labels);

}  // namespace aehcl

#endif  // AEHCL_DETECTION_H_
