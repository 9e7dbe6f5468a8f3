#include "aehcl/parameter_store.h"

#include <stdexcept>

namespace aehcl {

void GradientSet::zero() {
  for (Tensor& t : tensors_) t.fill(0.0);
}

void GradientSet::add(const GradientSet& other, double scale) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    auto dst = tensors_[i].values();
    auto src = other.tensors_[i].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

std::size_t ParameterStore::add(const std::string& name, Tensor init) {
  if (by_name_.count(name)) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  Tensor grad = init;
  grad.fill(0.0);
  params_.push_back({name, std::move(init), std::move(grad)});
  by_name_.emplace(name, params_.size() - 1);
  return params_.size() - 1;
}

std::optional<std::size_t> ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterStore::index(const std::string& name) const {
  auto found = find(name);
  if (!found) throw std::out_of_range("missing parameter '" + name + "'");
  return *found;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

GradientSet ParameterStore::make_gradient_set() const {
  std::vector<Tensor> tensors;
  tensors.reserve(params_.size());
  for (const auto& p : params_) {
    Tensor t = p.value;
    t.fill(0.0);
    tensors.push_back(std::move(t));
  }
  return GradientSet(std::move(tensors));
}

void ParameterStore::accumulate(const GradientSet& g, double scale) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = params_[i].grad.values();
    auto src = g[i].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

bool ParameterStore::values_equal(const ParameterStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name != other.params_[i].name) return false;
    if (!(params_[i].value == other.params_[i].value)) return false;
  }
  return true;
}

}  // namespace aehcl
