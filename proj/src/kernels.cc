// Batch loss/gradient kernels: an OpenMP version with fixed-chunk
// deterministic reduction, and the serial reference it is tested against.

#include <algorithm>
#include <cmath>

#include "aehcl/rng.h"
#include "aehcl/training.h"

namespace aehcl {
namespace {

// Per-event sparse gradient with respect to node embeddings.
class EventDz {
 public:
  explicit EventDz(std::size_t d = 0) : d_(d) {}

  void add(int local, ConstVec g, double scale) {
    if (scale == 0.0) return;
    std::size_t slot = rows_.size();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i] == local) {
        slot = i;
        break;
      }
    }
    if (slot == rows_.size()) {
      rows_.push_back(local);
      values_.resize(values_.size() + d_, 0.0);
    }
    double* dst = values_.data() + slot * d_;
    for (std::size_t j = 0; j < d_; ++j) dst[j] += scale * g[j];
  }

  void add_to(Tensor& dense) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      axpy(1.0, ConstVec(values_.data() + i * d_, d_), dense.row(rows_[i]));
    }
  }

 private:
  std::size_t d_;
  std::vector<int> rows_;
  std::vector<double> values_;
};

struct Scales {
  double pairwise = 0.0;
  double multivariate = 0.0;
  double inter = 0.0;
};

struct EventTerms {
  double pairwise = 0.0;
  double multivariate = 0.0;
  double inter = 0.0;
};

Rows rows_of(const std::vector<std::vector<double>>& vectors) {
  Rows rows;
  rows.reserve(vectors.size());
  for (const auto& v : vectors) rows.emplace_back(v);
  return rows;
}

void add_vec(ConstVec src, Tensor& dst) { axpy(1.0, src, dst.values()); }

EventTerms event_forward_backward(const ModelContext& ctx, const ParameterStore& params,
                                  const NodeEmbeddings& emb, const EventDraw& draw,
                                  const Scales& scales, GradientSet* grads, EventDz* dz) {
  const EventDataset& data = *ctx.dataset;
  const Ahin& g = data.ahin;
  const ModelLayout& layout = ctx.layout;
  const ModuleWeights& w = ctx.config.weights;
  const std::size_t d = layout.hidden;
  const Event& event = data.events[draw.event];
  const auto nodes = event_nodes(event);
  auto local = [&](NodeId v) { return emb.local[v]; };
  EventTerms terms;

  if (w.alpha > 0.0) {
    PairwiseGrads pg;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      Rows positives;
      std::vector<NodeId> positive_ids;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k == j) continue;
        positives.push_back(emb.row(nodes[k]));
        positive_ids.push_back(nodes[k]);
      }
      Rows negatives;
      for (NodeId v : draw.negatives[j]) negatives.push_back(emb.row(v));
      terms.pairwise += pairwise_loss_node(emb.row(nodes[j]), positives, negatives,
                                           ctx.config.temperature, grads ? &pg : nullptr);
      if (grads) {
        dz->add(local(nodes[j]), pg.anchor, scales.pairwise);
        for (std::size_t k = 0; k < positive_ids.size(); ++k) {
          dz->add(local(positive_ids[k]), pg.positives[k], scales.pairwise);
        }
        for (std::size_t k = 0; k < draw.negatives[j].size(); ++k) {
          dz->add(local(draw.negatives[j][k]), pg.negatives[k], scales.pairwise);
        }
      }
    }
  }

  if (w.beta > 0.0) {
    const Tensor& wq = params.value(layout.query);
    const Tensor& wk = params.value(layout.key);
    const Tensor& wv = params.value(layout.value);
    const Tensor& w_mu = params.value(layout.w_mu);
    const TypeId center_type = g.type_of(event.center);
    const auto h_center = type_aware(emb.row(event.center), center_type, params, layout);
    std::vector<std::vector<double>> h_pos, h_neg;
    for (NodeId v : event.context) h_pos.push_back(type_aware(emb.row(v), g.type_of(v), params, layout));
    for (NodeId v : draw.corrupted_context) {
      h_neg.push_back(type_aware(emb.row(v), g.type_of(v), params, layout));
    }
    const Rows pos_rows = rows_of(h_pos);
    const Rows neg_rows = rows_of(h_neg);
    AttentionCache pos_cache, neg_cache;
    const auto c_pos = multivariate_context(pos_rows, wq, wk, wv, &pos_cache);
    const auto c_neg = multivariate_context(neg_rows, wq, wk, wv, &neg_cache);
    const double x_pos = bilinear(h_center, w_mu, c_pos);
    const double x_neg = bilinear(h_center, w_mu, c_neg);
    terms.multivariate = neg_log_sigmoid(x_pos) + neg_log_one_minus_sigmoid(x_neg);

    if (grads) {
      const double g_pos = scales.multivariate * neg_log_sigmoid_grad(x_pos);
      const double g_neg = scales.multivariate * neg_log_one_minus_sigmoid_grad(x_neg);
      std::vector<double> dh_center(d, 0.0), dc_pos(d, 0.0), dc_neg(d, 0.0);
      bilinear_backward(h_center, c_pos, w_mu, g_pos, dh_center, dc_pos, (*grads)[layout.w_mu]);
      bilinear_backward(h_center, c_neg, w_mu, g_neg, dh_center, dc_neg, (*grads)[layout.w_mu]);
      std::vector<std::vector<double>> dh_pos, dh_neg;
      multivariate_context_backward(pos_rows, wq, wk, wv, pos_cache, dc_pos, dh_pos,
                                    (*grads)[layout.query], (*grads)[layout.key],
                                    (*grads)[layout.value]);
      multivariate_context_backward(neg_rows, wq, wk, wv, neg_cache, dc_neg, dh_neg,
                                    (*grads)[layout.query], (*grads)[layout.key],
                                    (*grads)[layout.value]);
      // h = z + o_t routes the same gradient to z and the type embedding.
      dz->add(local(event.center), dh_center, 1.0);
      add_vec(dh_center, (*grads)[layout.type_embedding[center_type]]);
      for (std::size_t j = 0; j < event.context.size(); ++j) {
        const NodeId v = event.context[j];
        dz->add(local(v), dh_pos[j], 1.0);
        add_vec(dh_pos[j], (*grads)[layout.type_embedding[g.type_of(v)]]);
      }
      for (std::size_t j = 0; j < draw.corrupted_context.size(); ++j) {
        const NodeId v = draw.corrupted_context[j];
        dz->add(local(v), dh_neg[j], 1.0);
        add_vec(dh_neg[j], (*grads)[layout.type_embedding[g.type_of(v)]]);
      }
    }
  }

  if (w.gamma > 0.0 && draw.has_inter()) {
    const Tensor& w_in = params.value(layout.w_in);
    struct Side {
      const Event* event;
      Rows context;
      std::vector<TypeId> types;
      InterAttentionCache cache;
      EventRepresentation rep;
    };
    auto build = [&](std::size_t index) {
      Side side;
      side.event = &data.events[index];
      for (NodeId v : side.event->context) {
        side.context.push_back(emb.row(v));
        side.types.push_back(g.type_of(v));
      }
      side.rep = event_representation(emb.row(side.event->center), side.context, side.types,
                                      params, layout, &side.cache);
      return side;
    };
    Side self = build(draw.event);
    Side pos = build(static_cast<std::size_t>(draw.positive_event));
    Side neg = build(static_cast<std::size_t>(draw.negative_event));
    const double x_pos = bilinear(self.rep.e, w_in, pos.rep.e);
    const double x_neg = bilinear(self.rep.e, w_in, neg.rep.e);
    terms.inter = neg_log_sigmoid(x_pos) + neg_log_one_minus_sigmoid(x_neg);

    if (grads) {
      const double g_pos = scales.inter * neg_log_sigmoid_grad(x_pos);
      const double g_neg = scales.inter * neg_log_one_minus_sigmoid_grad(x_neg);
      std::vector<double> de_self(2 * d, 0.0), de_pos(2 * d, 0.0), de_neg(2 * d, 0.0);
      bilinear_backward(self.rep.e, pos.rep.e, w_in, g_pos, de_self, de_pos, (*grads)[layout.w_in]);
      bilinear_backward(self.rep.e, neg.rep.e, w_in, g_neg, de_self, de_neg, (*grads)[layout.w_in]);
      auto backprop = [&](const Side& side, const std::vector<double>& de) {
        std::vector<double> dcenter(d, 0.0);
        std::vector<std::vector<double>> dcontext;
        event_representation_backward(emb.row(side.event->center), side.context, side.types,
                                      params, layout, side.cache, de, dcenter, dcontext, *grads);
        dz->add(local(side.event->center), dcenter, 1.0);
        for (std::size_t j = 0; j < side.event->context.size(); ++j) {
          dz->add(local(side.event->context[j]), dcontext[j], 1.0);
        }
      };
      backprop(self, de_self);
      backprop(pos, de_pos);
      backprop(neg, de_neg);
    }
  }
  return terms;
}

std::vector<NodeId> touched_nodes(const ModelContext& ctx, const BatchPlan& plan) {
  const EventDataset& data = *ctx.dataset;
  std::vector<NodeId> nodes;
  auto add_event = [&](std::size_t i) {
    const Event& e = data.events[i];
    nodes.push_back(e.center);
    nodes.insert(nodes.end(), e.context.begin(), e.context.end());
  };
  for (const auto& draw : plan.draws) {
    add_event(draw.event);
    for (const auto& negs : draw.negatives) nodes.insert(nodes.end(), negs.begin(), negs.end());
    nodes.insert(nodes.end(), draw.corrupted_context.begin(), draw.corrupted_context.end());
    if (draw.has_inter()) {
      add_event(static_cast<std::size_t>(draw.positive_event));
      add_event(static_cast<std::size_t>(draw.negative_event));
    }
  }
  return nodes;
}

void encoder_backward_range(const ModelContext& ctx, const ParameterStore& params,
                            const NodeEmbeddings& emb, const Tensor& dz, std::size_t begin,
                            std::size_t end, GradientSet& grads) {
  const Ahin& g = ctx.dataset->ahin;
  for (std::size_t r = begin; r < end; ++r) {
    const auto row = dz.row(r);
    if (std::all_of(row.begin(), row.end(), [](double x) { return x == 0.0; })) continue;
    const NodeId v = emb.nodes[r];
    transform_node_backward(g.feature(v), g.type_of(v), params, ctx.layout, emb.pre.row(r), row,
                            grads);
  }
}

}  // namespace

NodeEmbeddings encode_nodes(const ModelContext& ctx, const ParameterStore& params,
                            std::vector<NodeId> nodes, Execution execution) {
  const Ahin& g = ctx.dataset->ahin;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  NodeEmbeddings emb;
  emb.nodes = std::move(nodes);
  emb.local.assign(g.node_count(), -1);
  for (std::size_t r = 0; r < emb.nodes.size(); ++r) emb.local[emb.nodes[r]] = static_cast<int>(r);
  const std::size_t d = ctx.layout.hidden;
  emb.pre = Tensor(emb.nodes.size(), d);
  emb.z = Tensor(emb.nodes.size(), d);
  const auto count = static_cast<std::int64_t>(emb.nodes.size());
  auto encode_row = [&](std::int64_t r) {
    const NodeId v = emb.nodes[r];
    std::vector<double> pre;
    const auto z = transform_node(g.feature(v), g.type_of(v), params, ctx.layout, &pre);
    std::copy(pre.begin(), pre.end(), emb.pre.row(r).begin());
    std::copy(z.begin(), z.end(), emb.z.row(r).begin());
  };
  if (execution == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < count; ++r) encode_row(r);
  } else {
    for (std::int64_t r = 0; r < count; ++r) encode_row(r);
  }
  return emb;
}

NodeEmbeddings encode_all_nodes(const ModelContext& ctx, const ParameterStore& params,
                                Execution execution) {
  std::vector<NodeId> all(ctx.dataset->ahin.node_count());
  for (std::size_t v = 0; v < all.size(); ++v) all[v] = static_cast<NodeId>(v);
  return encode_nodes(ctx, params, std::move(all), execution);
}

BatchPlan sample_batch_plan(const ModelContext& ctx, std::span<const std::size_t> events,
                            std::uint64_t seed, std::uint64_t step) {
  const EventDataset& data = *ctx.dataset;
  const TrainConfig& cfg = ctx.config;
  Rng negatives_rng = Rng::stream(seed, "negatives", step);
  Rng corruption_rng = Rng::stream(seed, "corruption", step);
  Rng inter_rng = Rng::stream(seed, "inter", step);

  BatchPlan plan;
  plan.draws.reserve(events.size());
  for (std::size_t i : events) {
    EventDraw draw;
    draw.event = i;
    const Event& e = data.events[i];
    if (cfg.weights.alpha > 0.0) {
      draw.negatives =
          sample_pairwise_plan(data, i, cfg.negatives, cfg.temperature, negatives_rng).negatives;
    } else {
      draw.negatives.assign(e.context.size() + 1, {});
    }
    if (cfg.weights.beta > 0.0) {
      const auto corruption = corrupt_context(e, i, data.ahin, *ctx.clusters, corruption_rng);
      draw.corrupted_context = apply_corruption(e, corruption);
    }
    if (cfg.weights.gamma > 0.0 && ctx.neighbors->participates(i)) {
      draw.positive_event = ctx.neighbors->sample_positive(i, inter_rng);
      draw.negative_event = ctx.neighbors->sample_negative(i, inter_rng);
    }
    plan.draws.push_back(std::move(draw));
  }
  return plan;
}

BatchLoss batch_forward_backward(const ModelContext& ctx, const ParameterStore& params,
                                 const BatchPlan& plan, GradientSet* grads, Execution execution) {
  BatchLoss loss;
  const std::size_t batch = plan.draws.size();
  if (batch == 0) return loss;
  const ModuleWeights& w = ctx.config.weights;
  std::size_t inter_events = 0;
  for (const auto& draw : plan.draws) inter_events += draw.has_inter() ? 1 : 0;
  if (w.gamma == 0.0) inter_events = 0;

  Scales scales;
  scales.pairwise = w.alpha / static_cast<double>(batch);
  scales.multivariate = w.beta / static_cast<double>(batch);
  scales.inter = inter_events ? w.gamma / static_cast<double>(inter_events) : 0.0;

  const NodeEmbeddings emb = encode_nodes(ctx, params, touched_nodes(ctx, plan), execution);
  const std::size_t d = ctx.layout.hidden;
  std::vector<EventTerms> terms(batch);
  Tensor dz;
  if (grads) {
    grads->zero();
    dz = Tensor(emb.nodes.size(), d);
  }

  if (execution == Execution::kSerial) {
    for (std::size_t e = 0; e < batch; ++e) {
      EventDz event_dz(d);
      terms[e] = event_forward_backward(ctx, params, emb, plan.draws[e], scales, grads,
                                        grads ? &event_dz : nullptr);
      if (grads) event_dz.add_to(dz);
    }
    if (grads) encoder_backward_range(ctx, params, emb, dz, 0, emb.nodes.size(), *grads);
  } else {
    std::vector<GradientSet> chunk_grads;
    std::vector<EventDz> event_dz;
    if (grads) {
      chunk_grads.assign(kReductionChunks, *grads);
      event_dz.assign(batch, EventDz(d));
    }
    const auto chunks = static_cast<std::int64_t>(kReductionChunks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
      const auto range = chunk_range(batch, static_cast<std::size_t>(c), kReductionChunks);
      for (std::size_t e = range.begin; e < range.end; ++e) {
        terms[e] = event_forward_backward(ctx, params, emb, plan.draws[e], scales,
                                          grads ? &chunk_grads[c] : nullptr,
                                          grads ? &event_dz[e] : nullptr);
      }
    }
    if (grads) {
      for (const auto& cg : chunk_grads) grads->add(cg);
      for (const auto& edz : event_dz) edz.add_to(dz);
      for (auto& cg : chunk_grads) cg.zero();
      const std::size_t rows = emb.nodes.size();
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t c = 0; c < chunks; ++c) {
        const auto range = chunk_range(rows, static_cast<std::size_t>(c), kReductionChunks);
        encoder_backward_range(ctx, params, emb, dz, range.begin, range.end, chunk_grads[c]);
      }
      for (const auto& cg : chunk_grads) grads->add(cg);
    }
  }

  for (std::size_t e = 0; e < batch; ++e) {
    loss.pairwise += terms[e].pairwise;
    loss.multivariate += terms[e].multivariate;
    if (plan.draws[e].has_inter()) loss.inter += terms[e].inter;
  }
  loss.events = batch;
  loss.inter_events = inter_events;
  loss.pairwise /= static_cast<double>(batch);
  loss.multivariate /= static_cast<double>(batch);
  loss.inter = inter_events ? loss.inter / static_cast<double>(inter_events) : 0.0;
  loss.total = total_loss(loss.pairwise, loss.multivariate, loss.inter, w);
  return loss;
}

}  // namespace aehcl
