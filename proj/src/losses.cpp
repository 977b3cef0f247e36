#include "score/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace score {

double sigmoid(double x) {
    double v;
    if (x >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        v = e / (1.0 + e);
    }
    // keep the contract range (0,1) even where exp underflows
    v = std::max(v, std::numeric_limits<double>::denorm_min());
    v = std::min(v, 1.0 - std::numeric_limits<double>::epsilon() / 2);
    return v;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw ContractError("softmax: empty logits");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

SoftmaxXent softmax_xent(std::span<const double> logits, std::size_t label) {
    if (logits.empty()) throw ContractError("softmax_xent: empty logits");
    if (label >= logits.size())
        throw ContractError("softmax_xent: label " + std::to_string(label) + " out of range [0, " +
                            std::to_string(logits.size()) + ")");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    SoftmaxXent out;
    out.loss = -(logits[label] - mx) + std::log(z);
    out.probs.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out.probs[i] = std::exp(logits[i] - mx) / z;
    return out;
}

double binary_xent(double a, double s) {
    const double c = std::clamp(a, kLogClip, 1.0 - kLogClip);
    return -s * std::log(c) - (1.0 - s) * std::log(1.0 - c);
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& objective,
                                     std::span<const double> point, double step) {
    if (step <= 0.0) throw ContractError("finite_diff_grad: step must be positive");
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double fp = objective(x);
        x[i] = orig - step;
        const double fm = objective(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("finite_diff_grad: non-finite objective at coordinate " +
                               std::to_string(i));
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

} // namespace score
