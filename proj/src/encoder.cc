#include "aehcl/encoder.h"

#include <cmath>
#include <stdexcept>

#include "aehcl/rng.h"

namespace aehcl {
namespace {

Tensor xavier(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

std::size_t lookup(const ParameterStore& params, const std::string& name) {
  auto found = params.find(name);
  if (!found) throw std::out_of_range("missing model parameter '" + name + "'");
  return *found;
}

void check_type(const ModelLayout& layout, TypeId type) {
  if (type < 0 || static_cast<std::size_t>(type) >= layout.weight.size()) {
    throw std::out_of_range("no encoder parameters for node type " + std::to_string(type));
  }
}

}  // namespace

ModelLayout ModelLayout::create(ParameterStore& params, const Schema& schema,
                                std::size_t feature_width, std::size_t hidden,
                                Activation activation, std::uint64_t seed) {
  if (hidden == 0 || feature_width == 0) {
    throw std::invalid_argument("hidden and feature widths must be positive");
  }
  Rng rng(Rng::derive(seed, "init"));
  ModelLayout layout;
  layout.hidden = hidden;
  layout.feature_width = feature_width;
  layout.activation = activation;
  const TypeId center = schema.center_type();
  for (std::size_t t = 0; t < schema.size(); ++t) {
    const std::string& name = schema.type(static_cast<TypeId>(t)).name;
    layout.weight.push_back(params.add("encoder.weight." + name, xavier(hidden, feature_width, rng)));
    layout.bias.push_back(params.add("encoder.bias." + name, Tensor::Vector(hidden)));
    layout.type_embedding.push_back(params.add("type_embedding." + name, Tensor::Vector(hidden)));
    layout.attention_key.push_back(
        static_cast<TypeId>(t) == center
            ? kNoParameter
            : params.add("inter.attention." + name, xavier(hidden, hidden, rng)));
  }
  layout.query = params.add("multivariate.query", xavier(hidden, hidden, rng));
  layout.key = params.add("multivariate.key", xavier(hidden, hidden, rng));
  layout.value = params.add("multivariate.value", xavier(hidden, hidden, rng));
  layout.w_mu = params.add("multivariate.bilinear", xavier(hidden, hidden, rng));
  layout.w_in = params.add("inter.bilinear", xavier(2 * hidden, 2 * hidden, rng));
  return layout;
}

ModelLayout ModelLayout::bind(const ParameterStore& params, const Schema& schema,
                              Activation activation) {
  ModelLayout layout;
  layout.activation = activation;
  const TypeId center = schema.center_type();
  for (std::size_t t = 0; t < schema.size(); ++t) {
    const std::string& name = schema.type(static_cast<TypeId>(t)).name;
    layout.weight.push_back(lookup(params, "encoder.weight." + name));
    layout.bias.push_back(lookup(params, "encoder.bias." + name));
    layout.type_embedding.push_back(lookup(params, "type_embedding." + name));
    layout.attention_key.push_back(static_cast<TypeId>(t) == center
                                       ? kNoParameter
                                       : lookup(params, "inter.attention." + name));
  }
  layout.query = lookup(params, "multivariate.query");
  layout.key = lookup(params, "multivariate.key");
  layout.value = lookup(params, "multivariate.value");
  layout.w_mu = lookup(params, "multivariate.bilinear");
  layout.w_in = lookup(params, "inter.bilinear");
  layout.hidden = params.value(layout.w_mu).rows();
  layout.feature_width = params.value(layout.weight.front()).cols();
  return layout;
}

std::vector<std::size_t> ModelLayout::pairwise_group() const {
  std::vector<std::size_t> group = weight;
  group.insert(group.end(), bias.begin(), bias.end());
  return group;
}

std::vector<double> transform_node(ConstVec x, TypeId type, const ParameterStore& params,
                                   const ModelLayout& layout, std::vector<double>* pre) {
  check_type(layout, type);
  const Tensor& w = params.value(layout.weight[type]);
  const Tensor& b = params.value(layout.bias[type]);
  if (x.size() != w.cols()) throw std::invalid_argument("transform_node: feature width mismatch");
  std::vector<double> a(w.rows());
  matvec(w, x, a);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  std::vector<double> z(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) z[i] = activate(layout.activation, a[i]);
  if (pre) *pre = std::move(a);
  return z;
}

void transform_node_backward(ConstVec x, TypeId type, const ParameterStore& params,
                             const ModelLayout& layout, ConstVec pre, ConstVec dz,
                             GradientSet& grads, MutVec dx) {
  check_type(layout, type);
  std::vector<double> da(dz.size());
  for (std::size_t i = 0; i < da.size(); ++i) {
    da[i] = dz[i] * activate_derivative(layout.activation, pre[i]);
  }
  outer_add(1.0, da, x, grads[layout.weight[type]]);
  axpy(1.0, da, grads[layout.bias[type]].values());
  if (!dx.empty()) matvec_transposed_add(params.value(layout.weight[type]), da, dx);
}

std::vector<double> type_aware(ConstVec z, TypeId type, const ParameterStore& params,
                               const ModelLayout& layout) {
  check_type(layout, type);
  const Tensor& o = params.value(layout.type_embedding[type]);
  std::vector<double> h(z.begin(), z.end());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += o[i];
  return h;
}

}  // namespace aehcl
