#include "aehcl/numerics.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "aehcl/diagnostics.h"

namespace aehcl {

double dot(ConstVec a, ConstVec b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(ConstVec a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, ConstVec x, MutVec y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double cosine_similarity(ConstVec u, ConstVec v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine_similarity: length mismatch");
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) {
    diagnostics().zero_norm_cosine.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return dot(u, v) / (nu * nv);
}

void cosine_similarity_backward(ConstVec u, ConstVec v, double upstream, MutVec du,
                                MutVec dv) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0 || upstream == 0.0) return;
  const double inv = 1.0 / (nu * nv);
  const double cos = dot(u, v) * inv;
  const double su = cos / (nu * nu);
  const double sv = cos / (nv * nv);
  for (std::size_t i = 0; i < u.size(); ++i) {
    du[i] += upstream * (v[i] * inv - su * u[i]);
    dv[i] += upstream * (u[i] * inv - sv * v[i]);
  }
}

std::vector<double> softmax(ConstVec x) {
  if (x.empty()) throw std::invalid_argument("softmax: empty input");
  const double shift = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - shift);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Activation parse_activation(const std::string& name) {
  if (name == "elu") return Activation::kElu;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kElu: return "elu";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "elu";
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::kElu: return x > 0.0 ? x : std::expm1(x);
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
  }
  return x;
}

double activate_derivative(Activation act, double pre) {
  switch (act) {
    case Activation::kElu: return pre > 0.0 ? 1.0 : std::exp(pre);
    case Activation::kRelu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

void matvec(const Tensor& m, ConstVec x, MutVec y) {
  assert(m.cols() == x.size() && m.rows() == y.size());
  const std::size_t cols = m.cols();
  const double* row = m.data();
  for (std::size_t r = 0; r < m.rows(); ++r, row += cols) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += row[c] * x[c];
    y[r] = sum;
  }
}

void matvec_transposed_add(const Tensor& m, ConstVec x, MutVec y) {
  assert(m.rows() == x.size() && m.cols() == y.size());
  const std::size_t cols = m.cols();
  const double* row = m.data();
  for (std::size_t r = 0; r < m.rows(); ++r, row += cols) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

void outer_add(double scale, ConstVec a, ConstVec b, Tensor& g) {
  assert(g.rows() == a.size() && g.cols() == b.size());
  const std::size_t cols = g.cols();
  double* row = g.data();
  for (std::size_t r = 0; r < a.size(); ++r, row += cols) {
    const double ar = scale * a[r];
    if (ar == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ar * b[c];
  }
}

double bilinear(ConstVec u, const Tensor& m, ConstVec v) {
  assert(m.rows() == u.size() && m.cols() == v.size());
  const std::size_t cols = m.cols();
  const double* row = m.data();
  double total = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r, row += cols) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += row[c] * v[c];
    total += u[r] * sum;
  }
  return total;
}

double neg_log_score(double s) {
  return -std::log(std::clamp(s, kScoreClamp, 1.0 - kScoreClamp));
}

double neg_log_one_minus(double s) {
  return -std::log(1.0 - std::clamp(s, kScoreClamp, 1.0 - kScoreClamp));
}

double neg_log_score_logit_grad(double s) {
  if (s < kScoreClamp || s > 1.0 - kScoreClamp) return 0.0;
  return -(1.0 - s);
}

double neg_log_one_minus_logit_grad(double s) {
  if (s < kScoreClamp || s > 1.0 - kScoreClamp) return 0.0;
  return s;
}

namespace {

const double kLogitClamp = std::log((1.0 - kScoreClamp) / kScoreClamp);

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double neg_log_sigmoid(double x) {
  return softplus(-std::clamp(x, -kLogitClamp, kLogitClamp));
}

double neg_log_one_minus_sigmoid(double x) {
  return softplus(std::clamp(x, -kLogitClamp, kLogitClamp));
}

double neg_log_sigmoid_grad(double x) {
  if (std::abs(x) > kLogitClamp) return 0.0;
  return -sigmoid(-x);
}

double neg_log_one_minus_sigmoid_grad(double x) {
  if (std::abs(x) > kLogitClamp) return 0.0;
  return sigmoid(x);
}

}  // namespace aehcl
