#include "oracles.h"

#include <algorithm>
#include <cmath>

namespace aehcl::testing {
namespace {

double apply(Activation act, double x) {
  switch (act) {
    case Activation::kElu:
      return x > 0 ? x : std::exp(x) - 1.0;
    case Activation::kRelu:
      return x > 0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
  }
  return x;
}

std::vector<double> times(const Tensor& m, const std::vector<double>& x) {
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) y[r] += m(r, c) * x[c];
  }
  return y;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::size_t oracle_rank(const std::vector<double>& s, std::size_t i) {
  std::size_t r = 1;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++r;
  }
  return r;
}

double oracle_average_precision(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    ++positives;
    const std::size_t r = oracle_rank(s, i);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < s.size(); ++j) hits += y[j] && oracle_rank(s, j) <= r;
    sum += static_cast<double>(hits) / static_cast<double>(r);
  }
  return sum / static_cast<double>(positives);
}

double oracle_roc_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

double oracle_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  return inner(u, v) / (std::sqrt(inner(u, u)) * std::sqrt(inner(v, v)));
}

double oracle_info_nce(const std::vector<double>& anchor, const Matrix& positives, const Matrix& negatives,
                       double tau) {
  double pos = 0.0, all = 0.0;
  for (const auto& p : positives) pos += std::exp(oracle_cosine(anchor, p) / tau);
  all = pos;
  for (const auto& n : negatives) all += std::exp(oracle_cosine(anchor, n) / tau);
  return -std::log(pos / all);
}

double oracle_pairwise_component(const Matrix& nodes, PairwiseMode mode, const std::vector<Matrix>& negatives,
                                 double tau) {
  if (mode == PairwiseMode::kLoss) {
    double worst = -INFINITY;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      Matrix others;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k != j) others.push_back(nodes[k]);
      }
      worst = std::max(worst, oracle_info_nce(nodes[j], others, negatives[j], tau));
    }
    return -worst;
  }
  std::vector<double> sims;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) sims.push_back(oracle_cosine(nodes[a], nodes[b]));
  }
  double mean = 0.0;
  for (double s : sims) mean += s;
  mean /= static_cast<double>(sims.size());
  if (mode == PairwiseMode::kMin) return *std::min_element(sims.begin(), sims.end());
  if (mode == PairwiseMode::kAvg) return mean;
  double var = 0.0;
  for (double s : sims) var += (s - mean) * (s - mean);
  return -std::sqrt(var / static_cast<double>(sims.size()));
}

double oracle_best_partition(const Tensor& points, int k, std::vector<int>* best) {
  const std::size_t n = points.rows(), d = points.cols();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(k);
  double best_sse = INFINITY;
  std::vector<int> assign(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = static_cast<int>(c % static_cast<std::size_t>(k));
      c /= static_cast<std::size_t>(k);
    }
    double sse = 0.0;
    bool all_used = true;
    for (int cl = 0; cl < k; ++cl) {
      std::vector<double> mean(d, 0.0);
      double count = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != cl) continue;
        count += 1.0;
        for (std::size_t j = 0; j < d; ++j) mean[j] += points(i, j);
      }
      if (count == 0.0) {
        all_used = false;
        break;
      }
      for (double& m : mean) m /= count;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != cl) continue;
        for (std::size_t j = 0; j < d; ++j) sse += (points(i, j) - mean[j]) * (points(i, j) - mean[j]);
      }
    }
    if (all_used && sse < best_sse) {
      best_sse = sse;
      if (best) *best = assign;
    }
  }
  return best_sse;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

std::vector<double> oracle_multivariate_context(const Matrix& rows, const Tensor& query, const Tensor& key,
                                                const Tensor& value) {
  const std::size_t n = rows.size(), d = query.rows();
  Matrix q, k, v;
  for (const auto& h : rows) {
    q.push_back(times(query, h));
    k.push_back(times(key, h));
    v.push_back(times(value, h));
  }
  std::vector<double> pooled(d, -INFINITY);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += w[j] = std::exp(inner(q[i], k[j]) / std::sqrt(double(d)));
    for (std::size_t m = 0; m < d; ++m) {
      double out = 0.0;
      for (std::size_t j = 0; j < n; ++j) out += w[j] / total * v[j][m];
      pooled[m] = std::max(pooled[m], out);
    }
  }
  return pooled;
}

OracleRepresentation oracle_event_representation(const std::vector<double>& center, const Matrix& rows,
                                                 const std::vector<TypeId>& types, const ParameterStore& params,
                                                 const ModelLayout& layout) {
  OracleRepresentation out;
  double total = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto kj = times(params.value(layout.attention_key[types[j]]), rows[j]);
    out.weights.push_back(std::exp(apply(layout.activation, inner(kj, center))));
    total += out.weights.back();
  }
  for (double& w : out.weights) w /= total;
  out.e.assign(center.size(), 0.0);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t m = 0; m < center.size(); ++m) out.e[m] += out.weights[j] * rows[j][m];
  }
  out.e.insert(out.e.end(), center.begin(), center.end());
  return out;
}

double oracle_bilinear_score(const std::vector<double>& u, const Tensor& w, const std::vector<double>& v) {
  return 1.0 / (1.0 + std::exp(-inner(u, times(w, v))));
}

}  // namespace aehcl::testing
