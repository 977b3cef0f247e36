#pragma once

#include <functional>
#include <span>
#include <vector>

#include "score/errors.hpp"

namespace score {

/// Clipping bound applied to probabilities before logs, keeping losses
/// finite for saturated predictors.
inline constexpr double kLogClip = 1e-12;

/// 1/(1+e^-x), evaluated on the numerically stable branch for x < 0.
/// The result is clamped into the open interval (0, 1).
double sigmoid(double x);

std::vector<double> softmax(std::span<const double> logits);

struct SoftmaxXent {
    double loss = 0.0;
    std::vector<double> probs;
};

/// -log rho_label with max-subtraction stabilization; also exposes the
/// softmax vector.
SoftmaxXent softmax_xent(std::span<const double> logits, std::size_t label);

/// -s log a - (1-s) log(1-a). `a` is clipped to [kLogClip, 1-kLogClip];
/// fractional targets s in [0,1] are supported.
double binary_xent(double a, double s);

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& objective,
                                     std::span<const double> point, double step);

} // namespace score
