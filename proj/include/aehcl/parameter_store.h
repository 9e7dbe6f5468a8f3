#ifndef AEHCL_PARAMETER_STORE_H_
#define AEHCL_PARAMETER_STORE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aehcl/tensor.h"

namespace aehcl {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Gradient-shaped scratch space, one tensor per parameter in store order.
// Used as a per-worker accumulator that is reduced into the store.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(std::vector<Tensor> tensors) : tensors_(std::move(tensors)) {}

  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  std::size_t size() const { return tensors_.size(); }
  void zero();
  void add(const GradientSet& other, double scale = 1.0);

 private:
  std::vector<Tensor> tensors_;
};

class ParameterStore {
 public:
  // Registers a parameter; its gradient starts at zero. Throws on a duplicate name.
  std::size_t add(const std::string& name, Tensor init);

  std::size_t index(const std::string& name) const;
  std::optional<std::size_t> find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name).has_value(); }

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Tensor& value(std::size_t i) { return params_[i].value; }
  const Tensor& value(std::size_t i) const { return params_[i].value; }
  Tensor& grad(std::size_t i) { return params_[i].grad; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  GradientSet make_gradient_set() const;
  // grad += scale * g for every parameter.
  void accumulate(const GradientSet& g, double scale = 1.0);

  // Same names, shapes and values, bit for bit.
  bool values_equal(const ParameterStore& other) const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace aehcl

#endif  // AEHCL_PARAMETER_STORE_H_
