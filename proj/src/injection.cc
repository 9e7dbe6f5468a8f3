#include "aehcl/injection.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aehcl/diagnostics.h"
#include "aehcl/kmeans.h"
#include "aehcl/rng.h"

namespace aehcl {
namespace {

// First `count` entries of a seeded partial Fisher-Yates shuffle.
template <class T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t count, Rng& rng) {
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

std::size_t farthest_candidate(std::span<const double> target, const Tensor& features,
                               const std::vector<NodeId>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("farthest_candidate: no candidates");
  std::size_t best = 0;
  double best_dist = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double d = squared_distance(target, features.row(candidates[i]));
    if (d > best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

InjectionResult inject_anomalies(const EventDataset& dataset, const InjectionConfig& config) {
  const std::size_t m = dataset.event_count();
  if (!(config.anomaly_fraction > 0.0 && config.anomaly_fraction < 1.0)) {
    throw ValidationError("anomaly_fraction must lie in (0, 1)");
  }
  if (config.k_candidates < 1) throw ValidationError("k_candidates must be >= 1");
  const auto target_count =
      static_cast<std::size_t>(std::floor(config.anomaly_fraction * static_cast<double>(m)));
  if (target_count < 1) throw ValidationError("anomaly_fraction * m must be at least 1");

  InjectionResult result;
  result.dataset = dataset;
  EventDataset& out = result.dataset;
  const Ahin& g = out.ahin;
  out.labels = std::vector<std::uint8_t>(m, 0);

  std::vector<std::vector<NodeId>> by_type(g.schema.size());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    by_type[g.type_of(static_cast<NodeId>(v))].push_back(static_cast<NodeId>(v));
  }

  Rng rng(Rng::derive(config.seed, "inject"));
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  auto chosen = sample_without_replacement(all, target_count, rng);
  std::sort(chosen.begin(), chosen.end());

  for (std::size_t event_index : chosen) {
    Event& e = out.events[event_index];
    const std::size_t n = std::min<std::size_t>(1 + rng.uniform_index(3), e.context.size());
    std::vector<std::size_t> positions(e.context.size());
    for (std::size_t p = 0; p < positions.size(); ++p) positions[p] = p;
    positions = sample_without_replacement(positions, n, rng);

    InjectionRecord record;
    record.event = event_index;
    // Original members stay excluded after being swapped out.
    auto members = event_nodes(e);
    for (std::size_t position : positions) {
      const NodeId target = e.context[position];
      std::vector<NodeId> pool;
      for (NodeId v : by_type[g.type_of(target)]) {
        if (std::find(members.begin(), members.end(), v) == members.end()) pool.push_back(v);
      }
      if (pool.empty()) continue;
      if (pool.size() < config.k_candidates) {
        diagnostics().injection_short_candidates.fetch_add(1, std::memory_order_relaxed);
      }
      NodeId replacement;
      std::size_t candidate_count;
      if (config.strategy == ReplacementStrategy::kFarthest) {
        const auto candidates = sample_without_replacement(pool, config.k_candidates, rng);
        replacement = candidates[farthest_candidate(g.feature(target), g.features, candidates)];
        candidate_count = candidates.size();
      } else {
        replacement = pool[rng.uniform_index(pool.size())];
        candidate_count = 1;
      }
      e.context[position] = replacement;
      members.push_back(replacement);
      record.replacements.push_back({position, target, replacement, candidate_count});
    }
    if (!record.replacements.empty()) {
      (*out.labels)[event_index] = 1;
      result.manifest.push_back(std::move(record));
    }
  }
  return result;
}

void write_injection_manifest(const std::string& path, const EventDataset& dataset,
                              const std::vector<InjectionRecord>& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& record : manifest) {
    for (const auto& r : record.replacements) {
      out << dataset.events[record.event].id << '\t' << r.position << '\t'
          << dataset.ahin.external_ids[r.original] << '\t'
          << dataset.ahin.external_ids[r.replacement] << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace aehcl
