#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aehcl/grad_check.h"
#include "aehcl/intra_event.h"
#include "fixtures.h"

namespace aehcl {
namespace {

using testing::as_rows;
using testing::random_matrix;
using testing::random_vector;

Tensor identity(std::size_t d) {
  Tensor t(d, d);
  for (std::size_t i = 0; i < d; ++i) t(i, i) = 1.0;
  return t;
}

std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_vector(rng, d));
  return out;
}

// ---------------------------------------------------------------------------
// Pair-wise

TEST(PairwiseLossNode, EqualSimilaritiesGiveLog2) {
  const std::vector<double> a{1, 0}, p{1, 0}, n{2, 0};
  EXPECT_NEAR(pairwise_loss_node(a, as_rows({p}), as_rows({n}), 1.0), std::log(2.0), 1e-12);
}

TEST(PairwiseLossNode, TwoPositivesTwoOpposedNegatives) {
  const std::vector<double> a{0, 1};
  const std::vector<std::vector<double>> pos{{0, 3}, {0, 0.5}}, neg{{0, -1}, {0, -2}};
  const double e = std::exp(1.0);
  const double expected = -std::log(2 * e / (2 * e + 2 / e));
  EXPECT_NEAR(pairwise_loss_node(a, as_rows(pos), as_rows(neg), 1.0), expected, 1e-12);
  EXPECT_NEAR(expected, 0.12692801104297263, 1e-12);
}

TEST(PairwiseLossNode, NoNegativesIsZero) {
  const std::vector<double> a{1, 2}, p{3, -1};
  EXPECT_NEAR(pairwise_loss_node(a, as_rows({p}), {}, 0.5), 0.0, 1e-15);
}

TEST(PairwiseLossNode, RejectsBadInput) {
  const std::vector<double> a{1, 0}, p{1, 0};
  EXPECT_THROW(pairwise_loss_node(a, {}, as_rows({p}), 1.0), std::invalid_argument);
  EXPECT_THROW(pairwise_loss_node(a, as_rows({p}), {}, 0.0), std::invalid_argument);
  EXPECT_THROW(pairwise_loss_node(a, as_rows({p}), {}, -1.0), std::invalid_argument);
}

TEST(PairwiseLossNode, DecreasesAsPositiveSimilarityGrows) {
  const std::vector<double> a{1, 0};
  const std::vector<std::vector<double>> neg{{0.3, 0.9}, {-0.5, 0.2}};
  double previous = std::numeric_limits<double>::infinity();
  for (double s = -0.95; s <= 0.95; s += 0.05) {
    const std::vector<double> p{s, std::sqrt(1 - s * s)};
    const double loss = pairwise_loss_node(a, as_rows({p}), as_rows(neg), 0.5);
    EXPECT_LT(loss, previous) << s;
    previous = loss;
  }
}

TEST(PairwiseLossNode, IncreasesAsNegativeSimilarityGrows) {
  const std::vector<double> a{1, 0}, p{0.2, 0.7};
  double previous = -1.0;
  for (double s = -0.95; s <= 0.95; s += 0.05) {
    const std::vector<double> n{s, std::sqrt(1 - s * s)};
    const double loss = pairwise_loss_node(a, as_rows({p}), as_rows({n}), 1.0);
    EXPECT_GT(loss, previous) << s;
    previous = loss;
  }
}

TEST(PairwiseLossNode, GradientsPassGradCheck) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(5);
    const std::size_t np = 1 + rng.uniform_index(3), nn = rng.uniform_index(4);
    const double tau = 0.2 + rng.uniform();
    auto anchor = random_vector(rng, d);
    auto pos = random_rows(rng, np, d), neg = random_rows(rng, nn, d);
    PairwiseGrads g;
    pairwise_loss_node(anchor, as_rows(pos), as_rows(neg), tau, &g);
    ASSERT_EQ(g.positives.size(), np);
    ASSERT_EQ(g.negatives.size(), nn);
    auto eval = [&] { return pairwise_loss_node(anchor, as_rows(pos), as_rows(neg), tau); };
    EXPECT_LE(grad_check_vector([&](ConstVec) { return eval(); }, anchor, g.anchor).max_relative_error,
              1e-4);
    for (std::size_t j = 0; j < np; ++j) {
      EXPECT_LE(grad_check_vector([&](ConstVec) { return eval(); }, pos[j], g.positives[j])
                    .max_relative_error,
                1e-4);
    }
    for (std::size_t j = 0; j < nn; ++j) {
      EXPECT_LE(grad_check_vector([&](ConstVec) { return eval(); }, neg[j], g.negatives[j])
                    .max_relative_error,
                1e-4);
    }
  }
}

Tensor node_embeddings(const EventDataset& d, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  return random_matrix(rng, d.ahin.node_count(), width);
}

// Sum over anchors within an event, computed directly from the definition.
double event_loss_oracle(const EventDataset& d, const Tensor& z, const PairwiseBatchPlan& plan) {
  const auto nodes = event_nodes(d.events[plan.event]);
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Rows pos, neg;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j != i) pos.push_back(z.row(nodes[j]));
    }
    for (NodeId v : plan.negatives[i]) neg.push_back(z.row(v));
    total += pairwise_loss_node(z.row(nodes[i]), pos, neg, plan.temperature);
  }
  return total;
}

TEST(PairwiseLoss, SumOverAnchorsMeanOverEvents) {
  const EventDataset d = testing::random_dataset(3, 10, 4);
  const Tensor z = node_embeddings(d, 5, 4);
  Rng rng(9);
  std::vector<PairwiseBatchPlan> plans;
  for (std::size_t e : {0, 3, 7}) plans.push_back(sample_pairwise_plan(d, e, 4, 0.5, rng));
  double expected = 0.0;
  for (const auto& p : plans) expected += event_loss_oracle(d, z, p);
  expected /= plans.size();
  EXPECT_NEAR(pairwise_loss(d, z, plans), expected, 1e-12);

  auto doubled = plans;
  doubled.insert(doubled.end(), plans.begin(), plans.end());
  EXPECT_NEAR(pairwise_loss(d, z, doubled), expected, 1e-12);
}

TEST(SamplePairwisePlan, NegativesLieOutsideTheEvent) {
  const EventDataset d = testing::random_dataset(4, 20, 3);
  Rng rng(1);
  for (std::size_t e = 0; e < d.events.size(); ++e) {
    const auto plan = sample_pairwise_plan(d, e, 7, 1.0, rng);
    const auto nodes = event_nodes(d.events[e]);
    ASSERT_EQ(plan.negatives.size(), nodes.size());
    for (const auto& list : plan.negatives) {
      EXPECT_EQ(list.size(), 7u);
      for (NodeId v : list) {
        EXPECT_EQ(std::find(nodes.begin(), nodes.end(), v), nodes.end());
        EXPECT_GE(v, 0);
        EXPECT_LT(static_cast<std::size_t>(v), d.ahin.node_count());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Multivariate

TEST(MultivariateContext, SingleRowWithIdentityProjections) {
  const std::vector<double> c{0.5, -2, 3};
  const Tensor id = identity(3);
  EXPECT_EQ(multivariate_context(as_rows({c}), id, id, id), c);
}

TEST(MultivariateContext, ThreeRowsIdentityOracle) {
  const std::vector<std::vector<double>> rows{{1, 0}, {0, 1}, {1, 1}};
  const Tensor id = identity(2);
  const auto pooled = multivariate_context(as_rows(rows), id, id, id);
  // Direct evaluation: attention weights softmax(r_i . r_j / sqrt(2)).
  std::vector<double> expected(2, -std::numeric_limits<double>::infinity());
  for (const auto& qi : rows) {
    std::vector<double> w;
    for (const auto& kj : rows) w.push_back(std::exp((qi[0] * kj[0] + qi[1] * kj[1]) / std::sqrt(2.0)));
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t c = 0; c < 2; ++c) {
      double out = 0.0;
      for (std::size_t j = 0; j < 3; ++j) out += w[j] / total * rows[j][c];
      expected[c] = std::max(expected[c], out);
    }
  }
  ASSERT_EQ(pooled.size(), 2u);
  EXPECT_NEAR(pooled[0], expected[0], 1e-12);
  EXPECT_NEAR(pooled[1], expected[1], 1e-12);
}

TEST(MultivariateContext, PermutationInvariantBitExact) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(5), n = 1 + rng.uniform_index(6);
    const Tensor q = random_matrix(rng, d, d), k = random_matrix(rng, d, d), v = random_matrix(rng, d, d);
    auto rows = random_rows(rng, n, d);
    const auto base = multivariate_context(as_rows(rows), q, k, v);
    rng.shuffle(rows.begin(), rows.end());
    EXPECT_EQ(multivariate_context(as_rows(rows), q, k, v), base);
  }
}

TEST(MultivariateContext, BackwardPassesGradCheck) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(4), n = 1 + rng.uniform_index(4);
    ParameterStore params;
    const auto iq = params.add("q", random_matrix(rng, d, d));
    const auto ik = params.add("k", random_matrix(rng, d, d));
    const auto iv = params.add("v", random_matrix(rng, d, d));
    auto rows = random_rows(rng, n, d);
    const auto u = random_vector(rng, d);
    std::vector<std::vector<double>> dctx(n, std::vector<double>(d, 0.0));
    auto loss = [&](ParameterStore& p, bool with_grad) {
      AttentionCache cache;
      const auto out = multivariate_context(as_rows(rows), p.value(iq), p.value(ik), p.value(iv), &cache);
      if (with_grad) {
        for (auto& r : dctx) std::fill(r.begin(), r.end(), 0.0);
        multivariate_context_backward(as_rows(rows), p.value(iq), p.value(ik), p.value(iv), cache, u,
                                      dctx, p.grad(iq), p.grad(ik), p.grad(iv));
      }
      return dot(u, out);
    };
    EXPECT_LE(grad_check(loss, params).max_relative_error, 1e-4);
    params.zero_grad();
    loss(params, true);
    const auto analytic = dctx;
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = grad_check_vector([&](ConstVec) { return loss(params, false); }, rows[j], analytic[j]);
      EXPECT_LE(r.max_relative_error, 1e-4);
    }
  }
}

TEST(MultivariateScore, Examples) {
  const std::vector<double> h{1, 0}, c{1, 0};
  EXPECT_EQ(multivariate_score(h, c, Tensor(2, 2)), 0.5);
  Tensor w = identity(2);
  w(0, 0) = std::log(3.0);
  EXPECT_NEAR(multivariate_score(h, c, w), 0.75, 1e-12);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_vector(rng, 4), b = random_vector(rng, 4);
    auto na = a;
    for (double& x : na) x = -x;
    const Tensor m = random_matrix(rng, 4, 4);
    EXPECT_NEAR(multivariate_score(na, b, m), 1.0 - multivariate_score(a, b, m), 1e-12);
  }
}

TEST(BilinearBackward, PassesGradCheck) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(5);
    auto u = random_vector(rng, d), v = random_vector(rng, d);
    Tensor w = random_matrix(rng, d, d);
    std::vector<double> du(d, 0.0), dv(d, 0.0);
    Tensor dw(d, d);
    bilinear_backward(u, v, w, 1.0, du, dv, dw);
    EXPECT_LE(grad_check_vector([&](ConstVec) { return bilinear(u, w, v); }, u, du).max_relative_error,
              1e-6);
    EXPECT_LE(grad_check_vector([&](ConstVec) { return bilinear(u, w, v); }, v, dv).max_relative_error,
              1e-6);
    EXPECT_LE(grad_check_vector([&](ConstVec) { return bilinear(u, w, v); }, w.values(), dw.values())
                  .max_relative_error,
              1e-6);
  }
}

TEST(MultivariateLoss, Examples) {
  const std::vector<double> half{0.5}, one{1.0}, zero{0.0};
  EXPECT_NEAR(multivariate_loss(half, half), 2 * std::log(2.0), 1e-12);
  EXPECT_LE(multivariate_loss(one, zero), 2e-7 + 1e-12);
  EXPECT_GT(multivariate_loss(one, zero), 0.0);
  EXPECT_TRUE(std::isfinite(multivariate_loss(zero, one)));
  const std::vector<double> pos{0.9, 0.6}, neg{0.2, 0.3};
  const double expected = -(std::log(0.9) + std::log(0.8) + std::log(0.6) + std::log(0.7)) / 2;
  EXPECT_NEAR(multivariate_loss(pos, neg), expected, 1e-12);
}

// ---------------------------------------------------------------------------
// Clusters and corruption

EventDataset fallback_fixture() {
  AhinBuilder b(1);
  const TypeId q = b.add_type("q");
  const TypeId a = b.add_type("a");
  const std::vector<double> zero{0.0}, far{10.0};
  b.add_node("p", q, zero);
  b.add_node("a0", a, zero);
  b.add_node("a1", a, zero);
  b.add_node("a2", a, far);
  EventDataset d;
  d.ahin = b.build();
  d.ahin.schema.set_center(q);
  d.events.push_back(Event{"e0", 0, {1, 3}});
  return d;
}

TEST(ClusterNodes, CentersUnclusteredAndMembersConsistent) {
  const EventDataset d = testing::random_dataset(6, 15, 3, 3, 7);
  const NodeClusters c = cluster_nodes(d.ahin, 3, 5);
  for (std::size_t v = 0; v < d.ahin.node_count(); ++v) {
    const TypeId t = d.ahin.type_of(static_cast<NodeId>(v));
    if (t == d.ahin.schema.center_type()) {
      EXPECT_EQ(c.cluster[v], -1);
      continue;
    }
    ASSERT_GE(c.cluster[v], 0);
    const auto& group = c.members[t][c.cluster[v]];
    EXPECT_NE(std::find(group.begin(), group.end(), static_cast<NodeId>(v)), group.end());
  }
  EXPECT_THROW(cluster_nodes(d.ahin, 0, 1), std::invalid_argument);
}

TEST(ClusterNodes, KCappedAtTypeSize) {
  const EventDataset d = fallback_fixture();
  const NodeClusters c = cluster_nodes(d.ahin, 10, 1);
  EXPECT_EQ(c.members[1].size(), 3u);
  EXPECT_EQ(c.type_size(1), 3u);
}

TEST(CorruptContext, ReplacesOnePerTypeFromAnotherCluster) {
  const EventDataset d = testing::random_dataset(7, 30, 3, 3, 10);
  const NodeClusters c = cluster_nodes(d.ahin, 3, 2);
  Rng rng(3);
  for (std::size_t e = 0; e < d.events.size(); ++e) {
    const Event& ev = d.events[e];
    const auto out = corrupt_context(ev, e, d.ahin, c, rng);
    std::vector<TypeId> types;
    for (NodeId v : ev.context) types.push_back(d.ahin.type_of(v));
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());
    ASSERT_EQ(out.size(), types.size());
    const auto members = event_nodes(ev);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& r = out[i];
      EXPECT_EQ(d.ahin.type_of(r.original), types[i]);
      EXPECT_EQ(ev.context[r.position], r.original);
      EXPECT_EQ(d.ahin.type_of(r.replacement), types[i]);
      EXPECT_EQ(std::find(members.begin(), members.end(), r.replacement), members.end());
      if (!r.fallback) EXPECT_NE(r.replacement_cluster, r.original_cluster);
    }
    const auto corrupted = apply_corruption(ev, out);
    std::size_t changed = 0;
    for (std::size_t p = 0; p < ev.context.size(); ++p) changed += corrupted[p] != ev.context[p];
    EXPECT_EQ(changed, out.size());
  }
}

TEST(CorruptContext, FallsBackToAnyClusterWhenNeeded) {
  const EventDataset d = fallback_fixture();
  const NodeClusters c = cluster_nodes(d.ahin, 2, 1);
  ASSERT_EQ(c.cluster[1], c.cluster[2]);
  ASSERT_NE(c.cluster[1], c.cluster[3]);
  bool saw_fallback = false, saw_regular = false;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const auto out = corrupt_context(d.events[0], 0, d.ahin, c, rng);
    ASSERT_EQ(out.size(), 1u);
    // a1 is the only same-type node outside the event.
    EXPECT_EQ(out[0].replacement, 2);
    EXPECT_EQ(out[0].fallback, out[0].original == 1);
    (out[0].fallback ? saw_fallback : saw_regular) = true;
  }
  EXPECT_TRUE(saw_fallback);
  EXPECT_TRUE(saw_regular);
}

TEST(CorruptContext, SkipsWhenNoCandidateExists) {
  AhinBuilder b(1);
  const TypeId q = b.add_type("q");
  const TypeId a = b.add_type("a");
  const std::vector<double> x{0.0}, y{5.0};
  b.add_node("p", q, x);
  b.add_node("a0", a, x);
  b.add_node("a1", a, y);
  Ahin g = b.build();
  g.schema.set_center(q);
  const NodeClusters c = cluster_nodes(g, 2, 1);
  Rng rng(1);
  EXPECT_TRUE(corrupt_context(Event{"e", 0, {1, 2}}, 0, g, c, rng).empty());
}

}  // namespace
}  // namespace aehcl
