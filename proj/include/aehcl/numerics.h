#ifndef AEHCL_NUMERICS_H_
#define AEHCL_NUMERICS_H_

#include <span>
#include <string>
#include <vector>

#include "aehcl/tensor.h"

namespace aehcl {

using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

double dot(ConstVec a, ConstVec b);
double norm(ConstVec a);
void axpy(double alpha, ConstVec x, MutVec y);  // y += alpha * x

// u.v / (|u||v|). A zero-norm input yields 0 and bumps
// diagnostics().zero_norm_cosine.
double cosine_similarity(ConstVec u, ConstVec v);

// Accumulates upstream * d cos(u, v) / du into du and / dv into dv.
// Zero-norm inputs contribute nothing.
void cosine_similarity_backward(ConstVec u, ConstVec v, double upstream, MutVec du,
                                MutVec dv);

// Max-shifted softmax.
std::vector<double> softmax(ConstVec x);

double sigmoid(double x);

enum class Activation { kElu, kRelu, kTanh };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation act);

double activate(Activation act, double x);
// Derivative evaluated from the pre-activation value.
double activate_derivative(Activation act, double pre);

// y = M x for M of shape (rows, cols).
void matvec(const Tensor& m, ConstVec x, MutVec y);
// y += M^T x.
void matvec_transposed_add(const Tensor& m, ConstVec x, MutVec y);
// G += scale * a b^T.
void outer_add(double scale, ConstVec a, ConstVec b, Tensor& g);
// u^T M v.
double bilinear(ConstVec u, const Tensor& m, ConstVec v);

// Clamp bound used before taking logarithms of scores.
inline constexpr double kScoreClamp = 1e-7;

// -log(clamp(s)) and -log(1 - clamp(s)).
double neg_log_score(double s);
double neg_log_one_minus(double s);
// Derivatives of the two terms above with respect to the pre-sigmoid logit,
// given s = sigmoid(logit). Zero where the clamp is active.
double neg_log_score_logit_grad(double s);
double neg_log_one_minus_logit_grad(double s);

// The same two terms evaluated from the logit x (s = sigmoid(x)) without the
// cancellation in 1 - s, with the clamp applied as |x| <= logit(1 - kScoreClamp).
double neg_log_sigmoid(double x);
double neg_log_one_minus_sigmoid(double x);
double neg_log_sigmoid_grad(double x);
double neg_log_one_minus_sigmoid_grad(double x);

}  // namespace aehcl

#endif  // AEHCL_NUMERICS_H_
