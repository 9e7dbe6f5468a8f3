#ifndef AEHCL_ADAM_H_
#define AEHCL_ADAM_H_

#include <cstdint>
#include <vector>

#include "aehcl/parameter_store.h"

namespace aehcl {

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  // Per-parameter multiplier on learning_rate; used for group-wise decay.
  std::vector<double> lr_scale;

  static AdamState for_parameters(const ParameterStore& params, double learning_rate);
};

// One bias-corrected Adam update from the gradients held in `params`, which
// are zeroed afterwards. A non-finite gradient throws std::domain_error and
// leaves values untouched.
void adam_step(ParameterStore& params, AdamState& state);

}  // namespace aehcl

#endif  // AEHCL_ADAM_H_
