#include "aehcl/adam.h"

#include <cmath>
#include <stdexcept>

namespace aehcl {

AdamState AdamState::for_parameters(const ParameterStore& params, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (const auto& p : params) {
    Tensor zero = p.value;
    zero.fill(0.0);
    state.first_moment.push_back(zero);
    state.second_moment.push_back(std::move(zero));
  }
  state.lr_scale.assign(params.size(), 1.0);
  return state;
}

void adam_step(ParameterStore& params, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state does not match parameters");
  }
  for (const auto& p : params) p.grad.require_finite("gradient of " + p.name);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double lr = state.learning_rate * state.lr_scale[i];
    auto value = params.value(i).values();
    auto grad = params.grad(i).values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      value[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
      grad[j] = 0.0;
    }
  }
}

}  // namespace aehcl
