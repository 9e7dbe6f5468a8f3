#include "aehcl/injection.h"

#include <algorithm>

#include "aehcl/rng.h"

namespace aehcl {

void SynthConfig::validate() const {
  if (events == 0) throw ValidationError("synthetic config: events must be positive");
  if (context_types.empty()) throw ValidationError("synthetic config: no context types");
  for (const auto& t : context_types) {
    if (t.count == 0) throw ValidationError("synthetic config: type '" + t.name + "' has no nodes");
    if (t.name.empty() || t.name == center_type) {
      throw ValidationError("synthetic config: bad context type name '" + t.name + "'");
    }
  }
  if (feature_width == 0) throw ValidationError("synthetic config: feature_width must be positive");
  if (communities == 0) throw ValidationError("synthetic config: communities must be positive");
  if (mean_context_size < 2.0) {
    throw ValidationError("synthetic config: mean_context_size must be >= 2");
  }
  if (mean_context_size < static_cast<double>(context_types.size())) {
    throw ValidationError("synthetic config: mean_context_size below the number of context types");
  }
  if (feature_noise < 0.0) throw ValidationError("synthetic config: feature_noise must be >= 0");
  if (cross_community_rate < 0.0 || cross_community_rate > 1.0) {
    throw ValidationError("synthetic config: cross_community_rate must lie in [0, 1]");
  }
}

SynthConfig synth_preset(const std::string& name) {
  SynthConfig cfg;
  if (name == "standard") {
    cfg.center_type = "paper";
    cfg.context_types = {{"author", 1300, true}, {"venue", 12, false}};
    cfg.events = 2000;
    cfg.mean_context_size = 3.3;
    cfg.feature_width = 16;
    cfg.communities = 4;
    cfg.feature_noise = 1.0;
    cfg.cross_community_rate = 0.02;
    cfg.seed = 7;
  } else if (name == "aminer-like") {
    cfg.center_type = "paper";
    cfg.context_types = {{"author", 13541, true}, {"venue", 115, false}};
    cfg.events = 20567;
    cfg.mean_context_size = 3.3;
    cfg.feature_width = 108;
    cfg.communities = 16;
    cfg.feature_noise = 0.5;
    cfg.cross_community_rate = 0.02;
    cfg.seed = 7;
  } else {
    throw ValidationError("unknown synthetic preset '" + name + "'");
  }
  return cfg;
}

EventDataset generate_synthetic(const SynthConfig& config) {
  return generate_synthetic(config, nullptr);
}

EventDataset generate_synthetic(const SynthConfig& config, std::vector<int>* communities) {
  config.validate();
  const std::size_t k = config.feature_width;
  const std::size_t c_count = config.communities;
  Rng feature_rng = Rng::stream(config.seed, "synth.features");
  Rng event_rng = Rng::stream(config.seed, "synth.events");

  AhinBuilder builder(k);
  const std::size_t type_count = config.context_types.size() + 1;
  builder.add_type(config.center_type);
  for (const auto& t : config.context_types) builder.add_type(t.name);

  // Per (type, community) feature means.
  std::vector<std::vector<std::vector<double>>> means(type_count);
  for (auto& per_type : means) {
    per_type.assign(c_count, std::vector<double>(k));
    for (auto& mean : per_type) {
      for (double& x : mean) x = feature_rng.normal();
    }
  }

  std::vector<int> node_community;
  // pools[type][community] -> node ids
  std::vector<std::vector<std::vector<NodeId>>> pools(type_count,
                                                      std::vector<std::vector<NodeId>>(c_count));
  std::vector<double> row(k);
  auto add_nodes = [&](std::size_t type, const std::string& prefix, std::size_t count) {
    // Round-robin communities, so each one is populated when count >= C.
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t c = i % c_count;
      for (std::size_t j = 0; j < k; ++j) {
        row[j] = means[type][c][j] + config.feature_noise * feature_rng.normal();
      }
      const NodeId id = builder.add_node(prefix + std::to_string(i), static_cast<TypeId>(type), row);
      node_community.push_back(static_cast<int>(c));
      pools[type][c].push_back(id);
    }
  };
  add_nodes(0, config.center_type.substr(0, 1) + "_", config.events);
  for (std::size_t t = 0; t < config.context_types.size(); ++t) {
    const auto& spec = config.context_types[t];
    add_nodes(t + 1, spec.name.substr(0, 1) + std::to_string(t + 1) + "_", spec.count);
  }

  EventDataset dataset;
  dataset.ahin = builder.build();
  dataset.ahin.schema.set_center(0);

  std::vector<std::size_t> multi_types;
  for (std::size_t t = 0; t < config.context_types.size(); ++t) {
    if (config.context_types[t].multiple) multi_types.push_back(t + 1);
  }
  if (multi_types.empty()) {
    for (std::size_t t = 1; t < type_count; ++t) multi_types.push_back(t);
  }
  const double extra_mean =
      config.mean_context_size - static_cast<double>(config.context_types.size());

  dataset.events.reserve(config.events);
  for (std::size_t i = 0; i < config.events; ++i) {
    Event e;
    e.id = "e" + std::to_string(i);
    e.center = static_cast<NodeId>(i);  // centers were added first
    const std::size_t community = static_cast<std::size_t>(node_community[e.center]);

    std::vector<std::size_t> slots;
    for (std::size_t t = 1; t < type_count; ++t) slots.push_back(t);
    const auto extras = event_rng.poisson(extra_mean);
    for (std::uint64_t x = 0; x < extras; ++x) {
      slots.push_back(multi_types[event_rng.uniform_index(multi_types.size())]);
    }
    for (std::size_t type : slots) {
      std::size_t c = community;
      if (event_rng.uniform() < config.cross_community_rate) {
        c = event_rng.uniform_index(c_count);
      }
      const auto& pool = pools[type][c];
      if (pool.empty()) continue;
      // A few redraws to avoid repeating a node; give up rather than loop.
      for (int attempt = 0; attempt < 8; ++attempt) {
        const NodeId v = pool[event_rng.uniform_index(pool.size())];
        if (std::find(e.context.begin(), e.context.end(), v) == e.context.end()) {
          e.context.push_back(v);
          break;
        }
      }
    }
    dataset.events.push_back(std::move(e));
  }
  validate_dataset(dataset);
  if (communities) *communities = std::move(node_community);
  return dataset;
}

}  // namespace aehcl
