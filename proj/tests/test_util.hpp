#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "score/matrix.hpp"

namespace score::test {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double rel_err(double got, double want) {
    const double denom = std::max({std::abs(got), std::abs(want), 1e-30});
    return std::abs(got - want) / denom;
}

/// Max relative error between two gradient vectors, with an absolute floor
/// so near-zero coordinates compare absolutely.
inline double max_grad_rel_err(std::span<const double> a, std::span<const double> b,
                               double abs_floor = 1e-8) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), abs_floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

/// Entry-by-entry triple-loop product, independent of Matrix::matmul.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

} // namespace score::test
