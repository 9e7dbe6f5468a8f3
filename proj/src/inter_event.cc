#include "aehcl/inter_event.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "aehcl/diagnostics.h"

namespace aehcl {
namespace {

std::vector<std::size_t> canonical_order(const Rows& rows, const std::vector<TypeId>& types) {
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::lexicographical_compare(rows[a].begin(), rows[a].end(), rows[b].begin(),
                                     rows[b].end())) {
      return true;
    }
    if (std::lexicographical_compare(rows[b].begin(), rows[b].end(), rows[a].begin(),
                                     rows[a].end())) {
      return false;
    }
    return types[a] < types[b];
  });
  return order;
}

const Tensor& attention_matrix(const ParameterStore& params, const ModelLayout& layout,
                               TypeId type) {
  const std::size_t idx = layout.attention_key.at(type);
  if (idx == kNoParameter) throw std::invalid_argument("no attention parameters for center type");
  return params.value(idx);
}

}  // namespace

EventRepresentation event_representation(ConstVec center, const Rows& context,
                                         const std::vector<TypeId>& context_types,
                                         const ParameterStore& params, const ModelLayout& layout,
                                         InterAttentionCache* cache) {
  if (context.empty()) throw std::invalid_argument("event_representation: empty context");
  InterAttentionCache local;
  InterAttentionCache& c = cache ? *cache : local;
  const std::size_t n = context.size();
  const std::size_t d = center.size();

  c.order = canonical_order(context, context_types);
  c.keys = Tensor(n, d);
  c.logits_pre.assign(n, 0.0);
  std::vector<double> logits(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = c.order[j];
    matvec(attention_matrix(params, layout, context_types[src]), context[src], c.keys.row(j));
    c.logits_pre[j] = dot(c.keys.row(j), center);
    logits[j] = activate(layout.activation, c.logits_pre[j]);
  }
  c.weights = softmax(logits);

  EventRepresentation rep;
  rep.c_in.assign(d, 0.0);
  rep.weights.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    axpy(c.weights[j], context[c.order[j]], rep.c_in);
    rep.weights[c.order[j]] = c.weights[j];
  }
  rep.e = rep.c_in;
  rep.e.insert(rep.e.end(), center.begin(), center.end());
  return rep;
}

void event_representation_backward(ConstVec center, const Rows& context,
                                   const std::vector<TypeId>& context_types,
                                   const ParameterStore& params, const ModelLayout& layout,
                                   const InterAttentionCache& cache, ConstVec de, MutVec dcenter,
                                   std::vector<std::vector<double>>& dcontext, GradientSet& grads) {
  const std::size_t n = context.size();
  const std::size_t d = center.size();
  if (dcontext.size() != n) dcontext.assign(n, std::vector<double>(d, 0.0));
  const ConstVec dc = de.subspan(0, d);
  axpy(1.0, de.subspan(d, d), dcenter);

  std::vector<double> dalpha(n);
  double weighted = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = cache.order[j];
    dalpha[j] = dot(dc, context[src]);
    weighted += cache.weights[j] * dalpha[j];
    axpy(cache.weights[j], dc, dcontext[src]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = cache.order[j];
    const double dlogit = cache.weights[j] * (dalpha[j] - weighted);
    const double du = dlogit * activate_derivative(layout.activation, cache.logits_pre[j]);
    if (du == 0.0) continue;
    // u = k . z_q with k = P z_j
    axpy(du, cache.keys.row(j), dcenter);
    const std::size_t p_idx = layout.attention_key.at(context_types[src]);
    outer_add(du, center, context[src], grads[p_idx]);
    std::vector<double> dk(center.begin(), center.end());
    for (double& x : dk) x *= du;
    matvec_transposed_add(params.value(p_idx), dk, dcontext[src]);
  }
}

double inter_event_score(ConstVec e_a, ConstVec e_b, const Tensor& w_in) {
  return sigmoid(bilinear(e_a, w_in, e_b));
}

NeighborSets::NeighborSets(std::size_t events, int t_pos, int t_neg)
    : t_pos_(t_pos), t_neg_(t_neg), positives_(events), blocked_(events) {
  if (t_pos < 0 || t_neg < 0) throw std::invalid_argument("neighbor thresholds must be >= 0");
}

bool NeighborSets::is_positive(std::size_t i, std::size_t j) const {
  return std::binary_search(positives_[i].begin(), positives_[i].end(),
                            static_cast<std::uint32_t>(j));
}

bool NeighborSets::is_negative(std::size_t i, std::size_t j) const {
  if (i == j || t_neg_ == 0) return false;
  return !std::binary_search(blocked_[i].begin(), blocked_[i].end(),
                             static_cast<std::uint32_t>(j));
}

std::size_t NeighborSets::negative_count(std::size_t i) const {
  if (t_neg_ == 0) return 0;
  return event_count() - 1 - blocked_[i].size();
}

std::vector<std::uint32_t> NeighborSets::negatives(std::size_t i) const {
  std::vector<std::uint32_t> out;
  if (t_neg_ == 0) return out;
  const auto& blocked = blocked_[i];
  auto it = blocked.begin();
  for (std::uint32_t j = 0; j < event_count(); ++j) {
    while (it != blocked.end() && *it < j) ++it;
    if (j == i || (it != blocked.end() && *it == j)) continue;
    out.push_back(j);
  }
  return out;
}

bool NeighborSets::participates(std::size_t i) const {
  return !positives_[i].empty() && negative_count(i) > 0;
}

std::size_t NeighborSets::participant_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < event_count(); ++i) count += participates(i) ? 1 : 0;
  return count;
}

std::uint32_t NeighborSets::sample_positive(std::size_t i, Rng& rng) const {
  const auto& pos = positives_.at(i);
  if (pos.empty()) throw std::logic_error("event has no positive neighbors");
  return pos[rng.uniform_index(pos.size())];
}

std::uint32_t NeighborSets::sample_negative(std::size_t i, Rng& rng) const {
  if (negative_count(i) == 0) throw std::logic_error("event has no negative neighbors");
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto j = rng.uniform_index(event_count());
    if (is_negative(i, j)) return static_cast<std::uint32_t>(j);
  }
  const auto all = negatives(i);
  return all[rng.uniform_index(all.size())];
}

namespace {

void scan_event(const EventDataset& dataset, const std::vector<std::vector<std::uint32_t>>& index,
                std::size_t i, std::vector<int>& shared_all, std::vector<int>& shared_ctx,
                std::vector<std::uint32_t>& touched, NeighborSets& sets) {
  const Event& e = dataset.events[i];
  touched.clear();
  auto visit = [&](NodeId v, bool as_context) {
    for (std::uint32_t j : index[v]) {
      if (j == i) continue;
      if (shared_all[j] == 0 && shared_ctx[j] == 0) touched.push_back(j);
      ++shared_all[j];
      if (as_context) {
        // v is a context node of i; it counts as a meta-path only if it is a
        // context node of j as well.
        const Event& other = dataset.events[j];
        if (other.center != v) ++shared_ctx[j];
      }
    }
  };
  visit(e.center, false);
  for (NodeId v : e.context) visit(v, true);

  auto& pos = sets.mutable_positives(i);
  auto& blocked = sets.mutable_blocked(i);
  for (std::uint32_t j : touched) {
    if (shared_ctx[j] > sets.t_pos()) pos.push_back(j);
    if (sets.t_neg() > 0 && shared_all[j] >= sets.t_neg()) blocked.push_back(j);
    shared_all[j] = 0;
    shared_ctx[j] = 0;
  }
  std::sort(pos.begin(), pos.end());
  std::sort(blocked.begin(), blocked.end());
}

}  // namespace

NeighborSets build_neighbor_sets(const EventDataset& dataset, int t_pos, int t_neg,
                                 Execution execution) {
  diagnostics().neighbor_set_builds.fetch_add(1, std::memory_order_relaxed);
  const std::size_t m = dataset.event_count();
  NeighborSets sets(m, t_pos, t_neg);

  if (execution == Execution::kSerial) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        const Event& a = dataset.events[i];
        const Event& b = dataset.events[j];
        if (metapath_count(a, b) > static_cast<std::size_t>(t_pos)) {
          sets.mutable_positives(i).push_back(static_cast<std::uint32_t>(j));
        }
        if (t_neg > 0 && shared_node_count(a, b) >= static_cast<std::size_t>(t_neg)) {
          sets.mutable_blocked(i).push_back(static_cast<std::uint32_t>(j));
        }
      }
    }
    return sets;
  }

  // Node -> events containing it. Centers are unique per event, so event ids
  // are appended in increasing order.
  std::vector<std::vector<std::uint32_t>> index(dataset.ahin.node_count());
  for (std::size_t i = 0; i < m; ++i) {
    for (NodeId v : event_nodes(dataset.events[i])) index[v].push_back(static_cast<std::uint32_t>(i));
  }
#pragma omp parallel
  {
    std::vector<int> shared_all(m, 0);
    std::vector<int> shared_ctx(m, 0);
    std::vector<std::uint32_t> touched;
#pragma omp for schedule(dynamic, 64)
    for (std::size_t i = 0; i < m; ++i) {
      scan_event(dataset, index, i, shared_all, shared_ctx, touched, sets);
    }
  }
  return sets;
}

namespace {

std::string join_ids(const EventDataset& dataset, const std::vector<std::uint32_t>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ',';
    out += dataset.events[ids[k]].id;
  }
  return out;
}

}  // namespace

void save_neighbor_sets(const std::string& path, const EventDataset& dataset,
                        const NeighborSets& sets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "aehcl-neighbors\t1\t" << sets.t_pos() << '\t' << sets.t_neg() << '\t'
      << sets.event_count() << '\n';
  for (std::size_t i = 0; i < sets.event_count(); ++i) {
    out << dataset.events[i].id << '\t' << join_ids(dataset, sets.positives(i)) << '\t'
        << join_ids(dataset, sets.blocked(i)) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

NeighborSets load_neighbor_sets(const std::string& path, const EventDataset& dataset) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string magic;
  int version = 0, t_pos = 0, t_neg = 0;
  std::size_t m = 0;
  header >> magic >> version >> t_pos >> t_neg >> m;
  if (magic != "aehcl-neighbors" || version != 1) {
    throw ValidationError(path + ": not a neighbor-set cache");
  }
  if (m != dataset.event_count()) throw ValidationError(path + ": event count mismatch");

  std::unordered_map<std::string, std::uint32_t> by_id;
  for (std::size_t i = 0; i < m; ++i) by_id.emplace(dataset.events[i].id, static_cast<std::uint32_t>(i));
  auto parse_list = [&](const std::string& field, std::size_t number) {
    std::vector<std::uint32_t> ids;
    if (field.empty()) return ids;
    std::size_t start = 0;
    while (start <= field.size()) {
      const std::size_t comma = std::min(field.find(',', start), field.size());
      auto it = by_id.find(field.substr(start, comma - start));
      if (it == by_id.end()) {
        throw ValidationError(path + ":" + std::to_string(number) + ": unknown event id");
      }
      ids.push_back(it->second);
      start = comma + 1;
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  NeighborSets sets(m, t_pos, t_neg);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ValidationError(path + ": truncated");
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(i + 2) + ": malformed record");
    }
    if (line.substr(0, tab1) != dataset.events[i].id) {
      throw ValidationError(path + ":" + std::to_string(i + 2) + ": event order mismatch");
    }
    sets.mutable_positives(i) = parse_list(line.substr(tab1 + 1, tab2 - tab1 - 1), i + 2);
    sets.mutable_blocked(i) = parse_list(line.substr(tab2 + 1), i + 2);
  }
  return sets;
}

InterEventLoss inter_event_loss(const NeighborSets& sets,
                                const std::vector<EventRepresentation>& representations,
                                const Tensor& w_in, Rng& rng) {
  InterEventLoss result;
  double total = 0.0;
  for (std::size_t i = 0; i < sets.event_count(); ++i) {
    if (!sets.participates(i)) {
      ++result.excluded;
      continue;
    }
    const auto p = sets.sample_positive(i, rng);
    const auto q = sets.sample_negative(i, rng);
    const double s_pos = inter_event_score(representations[i].e, representations[p].e, w_in);
    const double s_neg = inter_event_score(representations[i].e, representations[q].e, w_in);
    total += neg_log_score(s_pos) + neg_log_one_minus(s_neg);
    ++result.participants;
  }
  if (result.participants == 0) {
    throw std::runtime_error("inter-event module inapplicable; set gamma=0");
  }
  diagnostics().inter_event_excluded.fetch_add(result.excluded, std::memory_order_relaxed);
  result.loss = total / static_cast<double>(result.participants);
  return result;
}

}  // namespace aehcl
