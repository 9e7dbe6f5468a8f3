#include "aehcl/detection.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "aehcl/rng.h"

namespace aehcl {
namespace {

PairwiseMode parse_pairwise_mode(const std::string& s) {
  if (s == "min") return PairwiseMode::kMin;
  if (s == "avg") return PairwiseMode::kAvg;
  if (s == "std") return PairwiseMode::kStd;
  if (s == "loss") return PairwiseMode::kLoss;
  throw ValidationError("unknown pairwise mode '" + s + "' (min, avg, std, loss)");
}

bool is_bilinear_mode(const std::string& s) {
  return s == "pos" || s == "neg" || s == "pos_and_neg";
}

BilinearMode parse_bilinear_mode(const std::string& s) {
  if (s == "pos") return BilinearMode::kPos;
  if (s == "neg") return BilinearMode::kNeg;
  if (s == "pos_and_neg") return BilinearMode::kPosAndNeg;
  throw ValidationError("unknown bilinear mode '" + s + "' (pos, neg, pos_and_neg)");
}

const char* pairwise_mode_name(PairwiseMode m) {
  switch (m) {
    case PairwiseMode::kMin:
      return "min";
    case PairwiseMode::kAvg:
      return "avg";
    case PairwiseMode::kStd:
      return "std";
    case PairwiseMode::kLoss:
      return "loss";
  }
  return "min";
}

const char* bilinear_mode_name(BilinearMode m) {
  switch (m) {
    case BilinearMode::kPos:
      return "pos";
    case BilinearMode::kNeg:
      return "neg";
    case BilinearMode::kPosAndNeg:
      return "pos_and_neg";
  }
  return "pos";
}

void check_lengths(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
}

std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Mean of the positive-pair term and/or the (1 - negative) term.
double combine_bilinear(BilinearMode mode, double pos, double neg) {
  switch (mode) {
    case BilinearMode::kPos:
      return pos;
    case BilinearMode::kNeg:
      return 1.0 - neg;
    case BilinearMode::kPosAndNeg:
      return 0.5 * (pos + (1.0 - neg));
  }
  return pos;
}

struct ScoringContext {
  const EventDataset* dataset = nullptr;
  const ParameterStore* params = nullptr;
  const ModelLayout* layout = nullptr;
  const ScoreOptions* options = nullptr;
  ModelContext model;
  NodeEmbeddings emb;
  std::vector<EventRepresentation> reps;
};

std::vector<double> type_aware_row(const ScoringContext& sc, NodeId v) {
  return type_aware(sc.emb.row(v), sc.dataset->ahin.type_of(v), *sc.params, *sc.layout);
}

double multivariate_for(const ScoringContext& sc, ConstVec h_center, const std::vector<NodeId>& ctx) {
  std::vector<std::vector<double>> h;
  for (NodeId v : ctx) h.push_back(type_aware_row(sc, v));
  Rows rows(h.begin(), h.end());
  const ParameterStore& p = *sc.params;
  const ModelLayout& l = *sc.layout;
  const auto c = multivariate_context(rows, p.value(l.query), p.value(l.key), p.value(l.value));
  return multivariate_score(h_center, c, p.value(l.w_mu));
}

// Returns nullopt-like NaN when the event has no usable neighbors.
double inter_for(const ScoringContext& sc, std::size_t i) {
  const ScoreOptions& o = *sc.options;
  const NeighborSets& sets = *sc.model.neighbors;
  const Tensor& w_in = sc.params->value(sc.layout->w_in);
  const bool need_pos = o.variant.bilinear != BilinearMode::kNeg;
  const bool need_neg = o.variant.bilinear != BilinearMode::kPos;
  if (need_pos && sets.positives(i).empty()) return NAN;
  if (need_neg && sets.negative_count(i) == 0) return NAN;

  double pos = 0.0, neg = 0.0;
  if (need_pos) {
    std::vector<std::uint32_t> chosen = sets.positives(i);
    if (chosen.size() > o.max_neighbors) {
      Rng rng = Rng::stream(o.seed, "score.positives", i);
      rng.shuffle(chosen.begin(), chosen.end());
      chosen.resize(o.max_neighbors);
      std::sort(chosen.begin(), chosen.end());
    }
    for (std::uint32_t j : chosen) pos += inter_event_score(sc.reps[i].e, sc.reps[j].e, w_in);
    pos /= static_cast<double>(chosen.size());
  }
  if (need_neg) {
    Rng rng = Rng::stream(o.seed, "score.negatives.inter", i);
    const std::size_t draws = std::max<std::size_t>(1, o.max_neighbors);
    for (std::size_t k = 0; k < draws; ++k) {
      const std::uint32_t j = sets.sample_negative(i, rng);
      neg += inter_event_score(sc.reps[i].e, sc.reps[j].e, w_in);
    }
    neg /= static_cast<double>(draws);
  }
  return combine_bilinear(o.variant.bilinear, pos, neg);
}

EventScore score_one(const ScoringContext& sc, std::size_t i) {
  const ScoreOptions& o = *sc.options;
  const EventDataset& data = *sc.dataset;
  const Event& event = data.events[i];
  const auto nodes = event_nodes(event);
  EventScore out;
  out.event_id = event.id;

  if (o.weights.alpha > 0.0) {
    Rows rows;
    for (NodeId v : nodes) rows.push_back(sc.emb.row(v));
    if (o.variant.pairwise == PairwiseMode::kLoss) {
      Rng rng = Rng::stream(o.seed, "score.negatives", i);
      const auto plan = sample_pairwise_plan(data, i, o.negatives, o.temperature, rng);
      std::vector<Rows> negatives;
      for (const auto& per_node : plan.negatives) {
        Rows r;
        for (NodeId v : per_node) r.push_back(sc.emb.row(v));
        negatives.push_back(std::move(r));
      }
      out.pairwise = pairwise_component(rows, o.variant.pairwise, &negatives, o.temperature);
    } else {
      out.pairwise = pairwise_component(rows, o.variant.pairwise);
    }
  }

  if (o.weights.beta > 0.0) {
    const auto h_center = type_aware_row(sc, event.center);
    double pos = 0.0, neg = 0.0;
    if (o.variant.bilinear != BilinearMode::kNeg) pos = multivariate_for(sc, h_center, event.context);
    if (o.variant.bilinear != BilinearMode::kPos) {
      Rng rng = Rng::stream(o.seed, "score.corruption", i);
      const auto corruption = corrupt_context(event, i, data.ahin, *sc.model.clusters, rng);
      neg = multivariate_for(sc, h_center, apply_corruption(event, corruption));
    }
    out.s_mu = combine_bilinear(o.variant.bilinear, pos, neg);
  }

  if (o.weights.gamma > 0.0) {
    out.s_in = inter_for(sc, i);
    out.s_in_imputed = std::isnan(out.s_in);
  }
  return out;
}

}  // namespace

ScoreVariant parse_variant(const std::string& text) {
  ScoreVariant v;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    if (is_bilinear_mode(text)) {
      v.bilinear = parse_bilinear_mode(text);
    } else {
      v.pairwise = parse_pairwise_mode(text);
    }
    return v;
  }
  v.pairwise = parse_pairwise_mode(text.substr(0, colon));
  v.bilinear = parse_bilinear_mode(text.substr(colon + 1));
  return v;
}

std::string variant_name(const ScoreVariant& variant) {
  return std::string(pairwise_mode_name(variant.pairwise)) + ":" +
         bilinear_mode_name(variant.bilinear);
}

double pairwise_component(const Rows& nodes, PairwiseMode mode, const std::vector<Rows>* negatives,
                          double temperature) {
  if (nodes.size() < 2) throw ValidationError("event needs at least 2 nodes to score");
  if (mode == PairwiseMode::kLoss) {
    if (!negatives || negatives->size() != nodes.size()) {
      throw std::invalid_argument("loss mode needs negatives for every node");
    }
    double worst = -INFINITY;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      Rows positives;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k != j) positives.push_back(nodes[k]);
      }
      worst = std::max(worst, pairwise_loss_node(nodes[j], positives, (*negatives)[j], temperature));
    }
    return -worst;
  }

  std::vector<double> sims;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      sims.push_back(cosine_similarity(nodes[a], nodes[b]));
    }
  }
  const double n = static_cast<double>(sims.size());
  switch (mode) {
    case PairwiseMode::kMin:
      return *std::min_element(sims.begin(), sims.end());
    case PairwiseMode::kAvg:
      return std::accumulate(sims.begin(), sims.end(), 0.0) / n;
    case PairwiseMode::kStd: {
      const double mean = std::accumulate(sims.begin(), sims.end(), 0.0) / n;
      double var = 0.0;
      for (double s : sims) var += (s - mean) * (s - mean);
      return -std::sqrt(var / n);
    }
    case PairwiseMode::kLoss:
      break;
  }
  return 0.0;
}

double combine_score(double pairwise, double s_mu, double s_in, const ModuleWeights& w) {
  return -(w.alpha * pairwise + w.beta * s_mu + w.gamma * s_in);
}

std::vector<double> ScoreReport::totals() const {
  std::vector<double> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.total);
  return out;
}

ScoreReport score_events(const EventDataset& dataset, const ParameterStore& params,
                         const ModelLayout& layout, const ScoreOptions& options) {
  const ModuleWeights& w = options.weights;
  if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0) {
    throw ValidationError("module weights must be non-negative");
  }
  ScoringContext sc;
  sc.dataset = &dataset;
  sc.params = &params;
  sc.layout = &layout;
  sc.options = &options;
  sc.model.dataset = &dataset;
  sc.model.layout = layout;
  sc.model.config.hidden = layout.hidden;
  sc.model.config.activation = layout.activation;
  if (w.beta > 0.0 && options.variant.bilinear != BilinearMode::kPos) {
    sc.model.clusters =
        cluster_nodes(dataset.ahin, options.clusters, Rng::derive(options.seed, "clusters"));
  }
  if (w.gamma > 0.0) {
    if (options.neighbors) {
      if (options.neighbors->event_count() != dataset.events.size()) {
        throw ValidationError("neighbor sets do not match the dataset");
      }
      sc.model.neighbors = *options.neighbors;
    } else {
      sc.model.neighbors =
          build_neighbor_sets(dataset, options.t_pos, options.t_neg, options.execution);
    }
  }
  sc.emb = encode_all_nodes(sc.model, params, options.execution);

  const std::size_t m = dataset.events.size();
  const auto count = static_cast<std::int64_t>(m);
  if (w.gamma > 0.0) {
    sc.reps.resize(m);
    auto represent = [&](std::int64_t i) {
      const Event& e = dataset.events[i];
      Rows context;
      std::vector<TypeId> types;
      for (NodeId v : e.context) {
        context.push_back(sc.emb.row(v));
        types.push_back(dataset.ahin.type_of(v));
      }
      sc.reps[i] = event_representation(sc.emb.row(e.center), context, types, params, layout);
    };
    if (options.execution == Execution::kParallel) {
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < count; ++i) represent(i);
    } else {
      for (std::int64_t i = 0; i < count; ++i) represent(i);
    }
  }

  ScoreReport report;
  report.variant = options.variant;
  report.weights = w;
  report.events.resize(m);
  if (options.execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) report.events[i] = score_one(sc, static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < count; ++i) report.events[i] = score_one(sc, static_cast<std::size_t>(i));
  }

  if (w.gamma > 0.0) {
    double sum = 0.0;
    std::size_t computed = 0;
    for (const auto& e : report.events) {
      if (!e.s_in_imputed) {
        sum += e.s_in;
        ++computed;
      }
    }
    const double fill = computed ? sum / static_cast<double>(computed) : 0.5;
    for (auto& e : report.events) {
      if (e.s_in_imputed) e.s_in = fill;
    }
  }
  for (auto& e : report.events) e.total = combine_score(e.pairwise, e.s_mu, e.s_in, w);
  const auto ranks = rank_scores(report.totals());
  for (std::size_t i = 0; i < m; ++i) report.events[i].rank = ranks[i];
  return report;
}

std::vector<std::size_t> rank_scores(const std::vector<double>& scores) {
  const auto order = descending_order(scores);
  std::vector<std::size_t> ranks(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
  return ranks;
}

void write_score_report(const std::string& path, const ScoreReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# variant\t" << variant_name(report.variant) << "\n";
  out << "# weights\t" << format_real(report.weights.alpha) << "," << format_real(report.weights.beta)
      << "," << format_real(report.weights.gamma) << "\n";
  out << "# checkpoint\t" << report.checkpoint_id << "\n";
  for (const auto& e : report.events) {
    out << e.event_id << '\t' << format_real(e.total) << '\t' << format_real(e.pairwise) << '\t'
        << format_real(e.s_mu) << '\t' << format_real(e.s_in) << '\t' << e.rank << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ScoreReport read_score_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  ScoreReport report;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError(path + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (line[0] == '#') {
      if (fields.size() < 2) continue;
      if (fields[0] == "# variant") report.variant = parse_variant(fields[1]);
      if (fields[0] == "# weights") {
        const auto wts = parse_real_list("weights", fields[1]);
        if (wts.size() != 3) fail("expected three weights");
        report.weights = {wts[0], wts[1], wts[2]};
      }
      if (fields[0] == "# checkpoint") report.checkpoint_id = fields[1];
      continue;
    }
    if (fields.size() != 6) fail("expected 6 fields, got " + std::to_string(fields.size()));
    EventScore e;
    e.event_id = fields[0];
    e.total = parse_real("total", fields[1]);
    e.pairwise = parse_real("pairwise", fields[2]);
    e.s_mu = parse_real("s_mu", fields[3]);
    e.s_in = parse_real("s_in", fields[4]);
    e.rank = parse_uint("rank", fields[5]);
    report.events.push_back(std::move(e));
  }
  return report;
}

double average_precision(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  check_lengths(scores, labels);
  const auto order = descending_order(scores);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average precision needs at least one positive label");
  return sum / static_cast<double>(hits);
}

double roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  check_lengths(scores, labels);
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Midranks (1-based) over tie groups.
  std::vector<double> rank(m);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double positives = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i]) {
      positives += 1.0;
      rank_sum += rank[i];
    }
  }
  const double negatives = static_cast<double>(m) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw std::invalid_argument("ROC AUC needs both positive and negative labels");
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

std::vector<std::size_t> detect(const std::vector<double>& scores, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= threshold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> detect_top_fraction(const std::vector<double>& scores, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) throw ValidationError("top fraction must lie in [0, 1]");
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(scores.size()) + 1e-9));
  if (count == 0) return {};
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return detect(scores, sorted[count - 1]);
}

ThresholdChoice f1_optimal_threshold(const std::vector<double>& scores,
                                     const std::vector<std::uint8_t>& labels) {
  check_lengths(scores, labels);
  const auto order = descending_order(scores);
  double total_pos = 0.0;
  for (auto l : labels) total_pos += l ? 1.0 : 0.0;
  if (total_pos == 0.0) throw std::invalid_argument("F1 threshold needs at least one positive label");
  ThresholdChoice best;
  best.threshold = scores.empty() ? 0.0 : scores[order.front()];
  double tp = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    tp += labels[order[r]] ? 1.0 : 0.0;
    // Only cut between distinct scores: everything tied is detected together.
    if (r + 1 < order.size() && scores[order[r + 1]] == scores[order[r]]) continue;
    const double predicted = static_cast<double>(r + 1);
    const double f1 = 2.0 * tp / (predicted + total_pos);
    if (f1 > best.f1) {
      best.f1 = f1;
      best.threshold = scores[order[r]];
    }
  }
  return best;
}

}  // namespace aehcl
