#ifndef AEHCL_INJECTION_H_
#define AEHCL_INJECTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aehcl/ahin.h"
#include "aehcl/config.h"

namespace aehcl {

enum class ReplacementStrategy {
  kFarthest,  // farthest of k same-type candidates in raw feature space
  kUniform,   // one uniformly drawn same-type node (older, weaker scheme)
};

struct InjectionConfig {
  double anomaly_fraction = 0.05;
  std::size_t k_candidates = 50;
  ReplacementStrategy strategy = ReplacementStrategy::kFarthest;
  std::uint64_t seed = 0;
};

struct Replacement {
  std::size_t position = 0;  // index into Event::context
  NodeId original = 0;
  NodeId replacement = 0;
  std::size_t candidates = 0;
};

struct InjectionRecord {
  std::size_t event = 0;
  std::vector<Replacement> replacements;
};

struct InjectionResult {
  EventDataset dataset;  // labelled copy
  std::vector<InjectionRecord> manifest;
};

// Picks floor(fraction * m) events uniformly; in each, n ~ U{1,2,3} (capped at
// the context size) distinct context nodes are replaced. Existing labels are
// overwritten. Throws ValidationError on an invalid configuration.
InjectionResult inject_anomalies(const EventDataset& dataset, const InjectionConfig& config);

// Index of the candidate with the largest Euclidean distance to `target`
// (first one on ties).
std::size_t farthest_candidate(std::span<const double> target, const Tensor& features,
                               const std::vector<NodeId>& candidates);

// `event_id<TAB>position<TAB>original_node_id<TAB>replacement_node_id`
void write_injection_manifest(const std::string& path, const EventDataset& dataset,
                              const std::vector<InjectionRecord>& manifest);

// ---------------------------------------------------------------------------
// Synthetic networks

struct ContextTypeSpec {
  std::string name;
  std::size_t count = 0;
  // Whether the type may contribute more than one node to an event.
  bool multiple = true;
};

struct SynthConfig {
  std::string center_type = "center";
  std::vector<ContextTypeSpec> context_types;
  std::size_t events = 0;  // one center node per event
  double mean_context_size = 3.0;
  std::size_t feature_width = 16;
  std::size_t communities = 4;
  double feature_noise = 0.5;          // std-dev around the community mean
  double cross_community_rate = 0.02;  // chance a context node ignores the center's community
  std::uint64_t seed = 0;

  void validate() const;
};

// Named presets: "standard" (2000 events, two context types, four
// communities, seed 7) and "aminer-like" (Aminer scale: 20567 events,
// author/venue context, 4.3 nodes per event).
SynthConfig synth_preset(const std::string& name);

// Every node gets a latent community and Gaussian features around a
// per-(type, community) mean. Each event takes one node of every context type
// plus Poisson extras for the `multiple` types, drawn from the center's
// community except with probability cross_community_rate.
EventDataset generate_synthetic(const SynthConfig& config);

// Also reports the latent community of every node.
EventDataset generate_synthetic(const SynthConfig& config, std::vector<int>* communities);

// Config-file keys. Injection: anomaly_fraction, k_candidates, strategy
// (farthest|uniform), seed. Synthetic: center_type, context_types
// (`name:count:multi|single,...`), events, mean_context_size, feature_width,
// communities, feature_noise, cross_community_rate, seed.
void set_injection_key(InjectionConfig& config, const std::string& key, const std::string& value);
void set_synth_key(SynthConfig& config, const std::string& key, const std::string& value);
std::string injection_config_text(const InjectionConfig& config);
std::string synth_config_text(const SynthConfig& config);

}  // namespace aehcl

#endif  // AEHCL_INJECTION_H_
