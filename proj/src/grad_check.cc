#include "aehcl/grad_check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aehcl/rng.h"

namespace aehcl {
namespace {

// Five-point stencil; truncation error O(h^4).
template <class Eval>
double derivative(double& slot, double h, Eval eval) {
  const double saved = slot;
  double f[4];
  const double offsets[4] = {2 * h, h, -h, -2 * h};
  for (int k = 0; k < 4; ++k) {
    slot = saved + offsets[k];
    f[k] = eval();
  }
  slot = saved;
  return (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h);
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const LossFn& loss, ParameterStore& params,
                           const GradCheckOptions& options) {
  params.zero_grad();
  loss(params, true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad);
  params.zero_grad();

  struct Coordinate {
    std::size_t param;
    std::size_t index;
  };
  std::vector<Coordinate> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params.value(p).size(); ++i) coords.push_back({p, i});
  }
  if (options.max_coordinates > 0 && options.max_coordinates < coords.size()) {
    Rng rng(Rng::derive(options.seed, "grad_check"));
    rng.shuffle(coords.begin(), coords.end());
    coords.resize(options.max_coordinates);
  }

  GradCheckResult result;
  const double h = options.step;
  for (const auto& c : coords) {
    const double numeric =
        derivative(params.value(c.param)[c.index], h, [&] { return loss(params, false); });
    const double a = analytic[c.param][c.index];
    const double err = relative_error(a, numeric);
    ++result.coordinates_checked;
    if (err > result.max_relative_error || !std::isfinite(err)) {
      result.max_relative_error = std::isfinite(err) ? err : INFINITY;
      result.worst_parameter = params[c.param].name;
      result.worst_index = c.index;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

GradCheckResult grad_check_vector(const std::function<double(ConstVec)>& f, MutVec x,
                                  ConstVec analytic, double step) {
  GradCheckResult result;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double numeric = derivative(x[i], step, [&] { return f(x); });
    const double err = relative_error(analytic[i], numeric);
    ++result.coordinates_checked;
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = i;
      result.worst_analytic = analytic[i];
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace aehcl
