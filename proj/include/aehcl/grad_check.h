#ifndef AEHCL_GRAD_CHECK_H_
#define AEHCL_GRAD_CHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "aehcl/numerics.h"
#include "aehcl/parameter_store.h"

namespace aehcl {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

// Evaluates the loss at the current parameter values. When `with_grad` is set
// the function must also accumulate the analytic gradient into params' grads.
using LossFn = std::function<double(ParameterStore& params, bool with_grad)>;

struct GradCheckOptions {
  double step = 1e-4;
  // 0 checks every coordinate; otherwise a seeded subset of this size.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

// Central differences against the analytic gradient. Relative error uses the
// denominator max(|analytic|, |numeric|, 1e-7). Parameter values are restored.
GradCheckResult grad_check(const LossFn& loss, ParameterStore& params,
                           const GradCheckOptions& options = {});

// Same check for a function of a plain vector.
GradCheckResult grad_check_vector(const std::function<double(ConstVec)>& f, MutVec x,
                                  ConstVec analytic, double step = 1e-4);

double relative_error(double analytic, double numeric);

}  // namespace aehcl

#endif  // AEHCL_GRAD_CHECK_H_
