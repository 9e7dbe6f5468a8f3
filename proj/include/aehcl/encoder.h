#ifndef AEHCL_ENCODER_H_
#define AEHCL_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "aehcl/ahin.h"
#include "aehcl/numerics.h"
#include "aehcl/parameter_store.h"

namespace aehcl {

inline constexpr std::size_t kNoParameter = std::numeric_limits<std::size_t>::max();

// Indices of every model parameter inside a ParameterStore.
//
// Per node type: encoder.weight.<t> (d x k), encoder.bias.<t> (d),
// type_embedding.<t> (d), and for context types inter.attention.<t> (d x d).
// Shared: multivariate.{query,key,value} (d x d), multivariate.bilinear
// (d x d) and inter.bilinear (2d x 2d).
struct ModelLayout {
  std::size_t hidden = 0;
  std::size_t feature_width = 0;
  Activation activation = Activation::kElu;
  std::vector<std::size_t> weight;
  std::vector<std::size_t> bias;
  std::vector<std::size_t> type_embedding;
  std::vector<std::size_t> attention_key;  // kNoParameter for the center type
  std::size_t query = kNoParameter;
  std::size_t key = kNoParameter;
  std::size_t value = kNoParameter;
  std::size_t w_mu = kNoParameter;
  std::size_t w_in = kNoParameter;

  // Registers and initializes all parameters: Xavier-uniform matrices, zero
  // biases and type embeddings.
  static ModelLayout create(ParameterStore& params, const Schema& schema,
                            std::size_t feature_width, std::size_t hidden, Activation activation,
                            std::uint64_t seed);
  // Resolves an existing store (e.g. a loaded checkpoint) against a schema.
  static ModelLayout bind(const ParameterStore& params, const Schema& schema,
                          Activation activation);

  // Parameters touched by the pair-wise loss.
  std::vector<std::size_t> pairwise_group() const;
};

// z = act(W_t x + b_t). `pre` receives W_t x + b_t when non-null.
std::vector<double> transform_node(ConstVec x, TypeId type, const ParameterStore& params,
                                   const ModelLayout& layout, std::vector<double>* pre = nullptr);

// Accumulates gradients of W_t, b_t into `grads` and, if non-empty, of x into dx.
void transform_node_backward(ConstVec x, TypeId type, const ParameterStore& params,
                             const ModelLayout& layout, ConstVec pre, ConstVec dz,
                             GradientSet& grads, MutVec dx = {});

// h = z + o_t.
std::vector<double> type_aware(ConstVec z, TypeId type, const ParameterStore& params,
                               const ModelLayout& layout);

}  // namespace aehcl

#endif  // AEHCL_ENCODER_H_
