#include "aehcl/intra_event.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aehcl/diagnostics.h"
#include "aehcl/kmeans.h"

namespace aehcl {
namespace {

double log_sum_exp(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) shift = std::max(shift, x[i]);
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) total += std::exp(x[i] - shift);
  return shift + std::log(total);
}

std::vector<std::size_t> canonical_order(const Rows& rows) {
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(rows[a].begin(), rows[a].end(), rows[b].begin(),
                                        rows[b].end());
  });
  return order;
}

bool contains(const std::vector<NodeId>& nodes, NodeId v) {
  return std::find(nodes.begin(), nodes.end(), v) != nodes.end();
}

}  // namespace

PairwiseBatchPlan sample_pairwise_plan(const EventDataset& dataset, std::size_t event,
                                       std::size_t n, double temperature, Rng& rng) {
  const Event& e = dataset.events.at(event);
  const auto members = event_nodes(e);
  const std::size_t total = dataset.ahin.node_count();
  if (total <= members.size() && n > 0) {
    throw std::invalid_argument("no nodes outside the event to sample negatives from");
  }
  PairwiseBatchPlan plan;
  plan.event = event;
  plan.temperature = temperature;
  plan.negatives.resize(members.size());
  for (auto& negs : plan.negatives) {
    negs.reserve(n);
    while (negs.size() < n) {
      const auto v = static_cast<NodeId>(rng.uniform_index(total));
      if (!contains(members, v)) negs.push_back(v);
    }
  }
  return plan;
}

double pairwise_loss_node(ConstVec anchor, const Rows& positives, const Rows& negatives,
                          double temperature, PairwiseGrads* grads) {
  if (positives.empty()) throw std::invalid_argument("pairwise loss: empty positive set");
  if (!(temperature > 0.0)) throw std::invalid_argument("pairwise loss: temperature must be > 0");
  const std::size_t np = positives.size();
  const std::size_t total = np + negatives.size();
  std::vector<double> logits(total);
  for (std::size_t i = 0; i < np; ++i) {
    logits[i] = cosine_similarity(anchor, positives[i]) / temperature;
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    logits[np + i] = cosine_similarity(anchor, negatives[i]) / temperature;
  }
  const double lse_pos = log_sum_exp(logits, 0, np);
  const double lse_all = log_sum_exp(logits, 0, total);
  const double loss = std::max(0.0, lse_all - lse_pos);

  if (grads) {
    const std::size_t d = anchor.size();
    grads->anchor.assign(d, 0.0);
    grads->positives.assign(np, std::vector<double>(d, 0.0));
    grads->negatives.assign(negatives.size(), std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < total; ++i) {
      const double p_all = std::exp(logits[i] - lse_all);
      const double p_pos = i < np ? std::exp(logits[i] - lse_pos) : 0.0;
      const double dsim = (p_all - p_pos) / temperature;
      if (i < np) {
        cosine_similarity_backward(anchor, positives[i], dsim, grads->anchor, grads->positives[i]);
      } else {
        cosine_similarity_backward(anchor, negatives[i - np], dsim, grads->anchor,
                                   grads->negatives[i - np]);
      }
    }
  }
  return loss;
}

double pairwise_loss(const EventDataset& dataset, const Tensor& embeddings,
                     const std::vector<PairwiseBatchPlan>& plans) {
  if (plans.empty()) return 0.0;
  double total = 0.0;
  for (const auto& plan : plans) {
    const auto nodes = event_nodes(dataset.events.at(plan.event));
    double event_loss = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      Rows positives;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k != j) positives.push_back(embeddings.row(nodes[k]));
      }
      Rows negatives;
      for (NodeId v : plan.negatives.at(j)) negatives.push_back(embeddings.row(v));
      event_loss += pairwise_loss_node(embeddings.row(nodes[j]), positives, negatives,
                                       plan.temperature);
    }
    total += event_loss;
  }
  return total / static_cast<double>(plans.size());
}

std::vector<double> multivariate_context(const Rows& context, const Tensor& query,
                                         const Tensor& key, const Tensor& value,
                                         AttentionCache* cache) {
  if (context.empty()) throw std::invalid_argument("multivariate_context: empty context");
  AttentionCache local;
  AttentionCache& c = cache ? *cache : local;
  const std::size_t n = context.size();
  const std::size_t d = query.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  c.order = canonical_order(context);
  c.query = Tensor(n, d);
  c.key = Tensor(n, d);
  c.value = Tensor(n, d);
  for (std::size_t j = 0; j < n; ++j) {
    const ConstVec h = context[c.order[j]];
    matvec(query, h, c.query.row(j));
    matvec(key, h, c.key.row(j));
    matvec(value, h, c.value.row(j));
  }
  c.weights = Tensor(n, n);
  c.output = Tensor(n, d);
  std::vector<double> scores(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) scores[l] = dot(c.query.row(j), c.key.row(l)) * scale;
    const auto w = softmax(scores);
    for (std::size_t l = 0; l < n; ++l) {
      c.weights(j, l) = w[l];
      axpy(w[l], c.value.row(l), c.output.row(j));
    }
  }
  std::vector<double> pooled(d);
  c.argmax.assign(d, 0);
  for (std::size_t m = 0; m < d; ++m) {
    double best = c.output(0, m);
    for (std::size_t j = 1; j < n; ++j) {
      if (c.output(j, m) > best) {
        best = c.output(j, m);
        c.argmax[m] = j;
      }
    }
    pooled[m] = best;
  }
  return pooled;
}

void multivariate_context_backward(const Rows& context, const Tensor& query, const Tensor& key,
                                   const Tensor& value, const AttentionCache& cache,
                                   ConstVec dpooled, std::vector<std::vector<double>>& dcontext,
                                   Tensor& dquery, Tensor& dkey, Tensor& dvalue) {
  const std::size_t n = context.size();
  const std::size_t d = query.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  if (dcontext.size() != n) dcontext.assign(n, std::vector<double>(d, 0.0));

  Tensor dout(n, d);
  for (std::size_t m = 0; m < d; ++m) dout(cache.argmax[m], m) = dpooled[m];

  Tensor dq(n, d), dk(n, d), dv(n, d);
  std::vector<double> da(n);
  for (std::size_t j = 0; j < n; ++j) {
    const ConstVec g = dout.row(j);
    double weighted = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      da[l] = dot(g, cache.value.row(l));
      weighted += cache.weights(j, l) * da[l];
      axpy(cache.weights(j, l), g, dv.row(l));
    }
    for (std::size_t l = 0; l < n; ++l) {
      const double ds = cache.weights(j, l) * (da[l] - weighted) * scale;
      if (ds == 0.0) continue;
      axpy(ds, cache.key.row(l), dq.row(j));
      axpy(ds, cache.query.row(j), dk.row(l));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t original = cache.order[j];
    const ConstVec h = context[original];
    auto& dh = dcontext[original];
    outer_add(1.0, dq.row(j), h, dquery);
    outer_add(1.0, dk.row(j), h, dkey);
    outer_add(1.0, dv.row(j), h, dvalue);
    matvec_transposed_add(query, dq.row(j), dh);
    matvec_transposed_add(key, dk.row(j), dh);
    matvec_transposed_add(value, dv.row(j), dh);
  }
}

double multivariate_score(ConstVec center, ConstVec context, const Tensor& w_mu) {
  return sigmoid(bilinear(center, w_mu, context));
}

void bilinear_backward(ConstVec u, ConstVec v, const Tensor& w, double dlogit, MutVec du,
                       MutVec dv, Tensor& dw) {
  if (dlogit == 0.0) return;
  std::vector<double> wv(w.rows());
  matvec(w, v, wv);
  axpy(dlogit, wv, du);
  std::vector<double> scaled_u(u.begin(), u.end());
  for (double& x : scaled_u) x *= dlogit;
  matvec_transposed_add(w, scaled_u, dv);
  outer_add(dlogit, u, v, dw);
}

double multivariate_loss(ConstVec positive_scores, ConstVec negative_scores) {
  if (positive_scores.size() != negative_scores.size()) {
    throw std::invalid_argument("multivariate_loss: score count mismatch");
  }
  if (positive_scores.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < positive_scores.size(); ++i) {
    total += neg_log_score(positive_scores[i]) + neg_log_one_minus(negative_scores[i]);
  }
  return total / static_cast<double>(positive_scores.size());
}

std::size_t NodeClusters::type_size(TypeId t) const {
  std::size_t total = 0;
  for (const auto& c : members.at(t)) total += c.size();
  return total;
}

NodeClusters cluster_nodes(const Ahin& ahin, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("cluster count must be positive");
  NodeClusters out;
  out.cluster.assign(ahin.node_count(), -1);
  out.members.resize(ahin.schema.size());
  for (TypeId t : ahin.schema.context_types()) {
    const auto nodes = ahin.nodes_of_type(t);
    if (nodes.empty()) continue;
    Tensor points(nodes.size(), ahin.feature_width());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto src = ahin.feature(nodes[i]);
      std::copy(src.begin(), src.end(), points.row(i).begin());
    }
    const int kt = std::min<int>(k, static_cast<int>(nodes.size()));
    const auto result = kmeans(points, kt, Rng::derive(seed, "clusters", static_cast<std::uint64_t>(t)));
    out.members[t].assign(kt, {});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.cluster[nodes[i]] = result.assignment[i];
      out.members[t][result.assignment[i]].push_back(nodes[i]);
    }
  }
  return out;
}

namespace {

// Uniform draw from the nodes of `type` outside cluster `exclude` (-1: none)
// and not in `event_members`; -1 when there is no such node.
NodeId draw_replacement(const NodeClusters& clusters, TypeId type, int exclude,
                        const std::vector<NodeId>& event_members, Rng& rng) {
  const auto& groups = clusters.members[type];
  std::size_t pool = 0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (static_cast<int>(c) != exclude) pool += groups[c].size();
  }
  if (pool == 0) return -1;
  auto pick = [&](std::size_t r) {
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (static_cast<int>(c) == exclude) continue;
      if (r < groups[c].size()) return groups[c][r];
      r -= groups[c].size();
    }
    return NodeId{-1};
  };
  for (int attempt = 0; attempt < 32; ++attempt) {
    const NodeId v = pick(rng.uniform_index(pool));
    if (!contains(event_members, v)) return v;
  }
  std::vector<NodeId> candidates;
  for (std::size_t r = 0; r < pool; ++r) {
    const NodeId v = pick(r);
    if (!contains(event_members, v)) candidates.push_back(v);
  }
  if (candidates.empty()) return -1;
  return candidates[rng.uniform_index(candidates.size())];
}

}  // namespace

std::vector<CorruptedContext> corrupt_context(const Event& event, std::size_t event_index,
                                              const Ahin& ahin, const NodeClusters& clusters,
                                              Rng& rng) {
  std::vector<TypeId> types;
  for (NodeId v : event.context) types.push_back(ahin.type_of(v));
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());

  const auto members = event_nodes(event);
  std::vector<CorruptedContext> out;
  for (TypeId t : types) {
    std::vector<std::size_t> positions;
    for (std::size_t p = 0; p < event.context.size(); ++p) {
      if (ahin.type_of(event.context[p]) == t) positions.push_back(p);
    }
    const std::size_t position = positions[rng.uniform_index(positions.size())];
    const NodeId original = event.context[position];
    const int original_cluster = clusters.cluster.at(original);

    CorruptedContext record;
    record.event = event_index;
    record.position = position;
    record.original = original;
    record.original_cluster = original_cluster;
    NodeId replacement = draw_replacement(clusters, t, original_cluster, members, rng);
    if (replacement < 0) {
      diagnostics().corruption_fallback.fetch_add(1, std::memory_order_relaxed);
      record.fallback = true;
      replacement = draw_replacement(clusters, t, -1, members, rng);
    }
    if (replacement < 0) {
      diagnostics().corruption_skipped.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    record.replacement = replacement;
    record.replacement_cluster = clusters.cluster.at(replacement);
    out.push_back(record);
  }
  return out;
}

std::vector<NodeId> apply_corruption(const Event& event,
                                     const std::vector<CorruptedContext>& corruption) {
  std::vector<NodeId> context = event.context;
  for (const auto& c : corruption) context.at(c.position) = c.replacement;
  return context;
}

}  // namespace aehcl
