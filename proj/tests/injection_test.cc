#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "aehcl/diagnostics.h"
#include "aehcl/injection.h"
#include "aehcl/kmeans.h"
#include "fixtures.h"

namespace aehcl {
namespace {

using testing::TempDir;

bool contains(const std::vector<NodeId>& v, NodeId x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

TEST(FarthestCandidate, FirstOnTies) {
  Tensor f(4, 2);
  f(1, 0) = 1;
  f(2, 0) = 3;
  f(2, 1) = 4;
  f(3, 1) = -5;
  const std::vector<double> target{0, 0};
  EXPECT_EQ(farthest_candidate(target, f, {1, 2, 3}), 1u);
  EXPECT_EQ(farthest_candidate(target, f, {3, 2, 1}), 0u);
  EXPECT_EQ(farthest_candidate(target, f, {1}), 0u);
  EXPECT_THROW(farthest_candidate(target, f, {}), std::invalid_argument);
}

TEST(InjectAnomalies, RejectsInvalidConfig) {
  const EventDataset d = testing::random_dataset(1, 30, 2);
  InjectionConfig c;
  for (double f : {0.0, 1.0, -0.1, 0.02}) {
    c.anomaly_fraction = f;
    EXPECT_THROW(inject_anomalies(d, c), ValidationError) << f;
  }
  c.anomaly_fraction = 0.1;
  c.k_candidates = 0;
  EXPECT_THROW(inject_anomalies(d, c), ValidationError);
}

TEST(InjectAnomalies, LabelsMatchManifestAndEditsAreLocal) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EventDataset d = testing::random_dataset(seed, 80, 3, 2, 12);
    InjectionConfig c;
    c.anomaly_fraction = 0.1;
    c.k_candidates = 5;
    c.seed = seed;
    const InjectionResult r = inject_anomalies(d, c);
    ASSERT_TRUE(r.dataset.labels);
    const auto& labels = *r.dataset.labels;
    EXPECT_EQ(r.manifest.size(), 8u);
    EXPECT_EQ(std::count(labels.begin(), labels.end(), 1), 8);

    std::set<std::size_t> edited;
    for (const auto& rec : r.manifest) {
      edited.insert(rec.event);
      const Event& before = d.events[rec.event];
      const Event& after = r.dataset.events[rec.event];
      EXPECT_EQ(labels[rec.event], 1);
      EXPECT_GE(rec.replacements.size(), 1u);
      EXPECT_LE(rec.replacements.size(), std::min<std::size_t>(3, before.context.size()));
      EXPECT_EQ(after.center, before.center);
      std::set<std::size_t> positions;
      for (const auto& rep : rec.replacements) {
        positions.insert(rep.position);
        EXPECT_EQ(before.context[rep.position], rep.original);
        EXPECT_EQ(after.context[rep.position], rep.replacement);
        EXPECT_EQ(d.ahin.type_of(rep.original), d.ahin.type_of(rep.replacement));
        EXPECT_FALSE(contains(event_nodes(before), rep.replacement));
        EXPECT_LE(rep.candidates, 5u);
      }
      EXPECT_EQ(positions.size(), rec.replacements.size());
      for (std::size_t p = 0; p < before.context.size(); ++p) {
        if (!positions.count(p)) EXPECT_EQ(after.context[p], before.context[p]);
      }
      std::vector<NodeId> sorted = after.context;
      std::sort(sorted.begin(), sorted.end());
      EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
    }
    for (std::size_t i = 0; i < d.events.size(); ++i) {
      if (edited.count(i)) continue;
      EXPECT_EQ(labels[i], 0);
      EXPECT_EQ(r.dataset.events[i].context, d.events[i].context);
    }
  }
}

TEST(InjectAnomalies, FullCandidateSetPicksFarthestNode) {
  const EventDataset d = testing::random_dataset(4, 40, 3, 2, 10);
  InjectionConfig c;
  c.anomaly_fraction = 0.25;
  c.k_candidates = 1000;
  c.seed = 2;
  diagnostics().reset();
  const InjectionResult r = inject_anomalies(d, c);
  EXPECT_GT(diagnostics().injection_short_candidates.load(), 0u);
  for (const auto& rec : r.manifest) {
    auto members = event_nodes(d.events[rec.event]);
    for (const auto& rep : rec.replacements) {
      double best = -1.0;
      for (std::size_t v = 0; v < d.ahin.node_count(); ++v) {
        const NodeId id = static_cast<NodeId>(v);
        if (d.ahin.type_of(id) != d.ahin.type_of(rep.original) || contains(members, id)) continue;
        best = std::max(best, squared_distance(d.ahin.feature(rep.original), d.ahin.feature(id)));
      }
      EXPECT_EQ(squared_distance(d.ahin.feature(rep.original), d.ahin.feature(rep.replacement)), best);
      members.push_back(rep.replacement);
    }
  }
}

TEST(InjectAnomalies, UniformStrategyAndDeterminism) {
  const EventDataset d = testing::random_dataset(5, 60, 2, 2, 10);
  InjectionConfig c;
  c.anomaly_fraction = 0.2;
  c.strategy = ReplacementStrategy::kUniform;
  c.seed = 3;
  const auto a = inject_anomalies(d, c), b = inject_anomalies(d, c);
  EXPECT_EQ(a.dataset.labels, b.dataset.labels);
  for (std::size_t i = 0; i < d.events.size(); ++i) {
    EXPECT_EQ(a.dataset.events[i].context, b.dataset.events[i].context);
  }
  for (const auto& rec : a.manifest) {
    for (const auto& rep : rec.replacements) EXPECT_EQ(rep.candidates, 1u);
  }
  c.seed = 4;
  EXPECT_NE(inject_anomalies(d, c).dataset.labels, a.dataset.labels);
}

TEST(InjectAnomalies, ManifestFileFormat) {
  TempDir dir;
  const EventDataset d = testing::random_dataset(6, 20, 2);
  InjectionConfig c;
  c.anomaly_fraction = 0.1;
  c.seed = 1;
  const auto r = inject_anomalies(d, c);
  write_injection_manifest(dir.file("m.tsv"), r.dataset, r.manifest);
  std::string expected;
  for (const auto& rec : r.manifest) {
    for (const auto& rep : rec.replacements) {
      expected += d.events[rec.event].id + "\t" + std::to_string(rep.position) + "\t" +
                  d.ahin.external_ids[rep.original] + "\t" + d.ahin.external_ids[rep.replacement] + "\n";
    }
  }
  EXPECT_FALSE(expected.empty());
  EXPECT_EQ(testing::read_file(dir.file("m.tsv")), expected);
}

TEST(InjectionConfig, KeysAndText) {
  InjectionConfig c;
  set_injection_key(c, "anomaly_fraction", "0.1");
  set_injection_key(c, "k_candidates", "7");
  set_injection_key(c, "strategy", "uniform");
  set_injection_key(c, "seed", "9");
  EXPECT_EQ(injection_config_text(c), "anomaly_fraction = 0.1\nk_candidates = 7\nstrategy = uniform\nseed = 9\n");
  EXPECT_THROW(set_injection_key(c, "strategy", "nearest"), ValidationError);
  EXPECT_THROW(set_injection_key(c, "fraction", "0.1"), ValidationError);
}

TEST(SynthConfig, TextRoundTrip) {
  const SynthConfig a = synth_preset("standard");
  SynthConfig b;
  for (const auto& [k, v] : parse_key_values(synth_config_text(a))) set_synth_key(b, k, v);
  EXPECT_EQ(synth_config_text(b), synth_config_text(a));
  EXPECT_EQ(b.context_types.size(), 2u);
  EXPECT_EQ(b.context_types[1].name, "venue");
  EXPECT_FALSE(b.context_types[1].multiple);
  EXPECT_THROW(set_synth_key(b, "context_types", "author:10"), ValidationError);
  EXPECT_THROW(set_synth_key(b, "size", "1"), ValidationError);
  EXPECT_THROW(synth_preset("huge"), ValidationError);
}

TEST(SynthConfig, Validation) {
  auto base = [] {
    SynthConfig c;
    c.context_types = {{"a", 10, true}};
    c.events = 10;
    return c;
  };
  EXPECT_NO_THROW(base().validate());
  auto c = base();
  c.events = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = base();
  c.context_types[0].name = c.center_type;
  EXPECT_THROW(c.validate(), ValidationError);
  c = base();
  c.mean_context_size = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = base();
  c.feature_noise = -1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = base();
  c.cross_community_rate = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(GenerateSynthetic, ShapeAndDeterminism) {
  SynthConfig c = synth_preset("standard");
  c.events = 400;
  std::vector<int> communities;
  const EventDataset d = generate_synthetic(c, &communities);
  EXPECT_EQ(d.events.size(), 400u);
  EXPECT_EQ(d.ahin.node_count(), 400u + 1300u + 12u);
  EXPECT_EQ(d.ahin.feature_width(), 16u);
  EXPECT_EQ(communities.size(), d.ahin.node_count());
  EXPECT_EQ(d.ahin.schema.type(d.ahin.schema.center_type()).name, "paper");

  double total = 0.0;
  for (const auto& e : d.events) {
    total += static_cast<double>(e.context.size());
    std::size_t venues = 0;
    for (NodeId v : e.context) venues += d.ahin.schema.type(d.ahin.type_of(v)).name == "venue";
    EXPECT_EQ(venues, 1u);
  }
  EXPECT_NEAR(total / 400.0, 3.3, 0.15);

  const EventDataset again = generate_synthetic(c);
  EXPECT_EQ(again.ahin.features, d.ahin.features);
  for (std::size_t i = 0; i < d.events.size(); ++i) EXPECT_EQ(again.events[i].context, d.events[i].context);
}

TEST(GenerateSynthetic, NoCrossingKeepsCommunities) {
  SynthConfig c = synth_preset("standard");
  c.events = 300;
  c.cross_community_rate = 0.0;
  std::vector<int> communities;
  const EventDataset d = generate_synthetic(c, &communities);
  for (const auto& e : d.events) {
    for (NodeId v : e.context) EXPECT_EQ(communities[v], communities[e.center]);
  }
}

}  // namespace
}  // namespace aehcl
