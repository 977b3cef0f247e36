#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "score/errors.hpp"

namespace score {

/// Dense row-major matrix of 64-bit reals. All shapes are fixed at
/// construction; operations allocate fresh results.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double> col(std::size_t c) const;
    void set_col(std::size_t c, std::span<const double> v);
    void set_row(std::size_t r, std::span<const double> v);

    std::string shape_str() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& m, double s);

/// y = A x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
/// y = A^T x (no transpose materialized)
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
void check_finite(const Matrix& m, const std::string& what);

/// Orthonormal basis of the column span via modified Gram-Schmidt with
/// re-orthogonalization; columns whose residual norm is <= tol are dropped.
/// The returned matrix has one column per basis vector (possibly zero cols).
Matrix orthonormal_basis(const Matrix& columns, double tol = 1e-10);

/// || v - B B^T v ||_2 for an orthonormal basis B.
double distance_to_span(const Matrix& basis, std::span<const double> v);

/// Deterministic seedable random stream: xoshiro256** state expanded from
/// the seed with splitmix64. Identical seeds yield identical sequences on
/// every platform; all sampling (uniform, normal, shuffles) is implemented
/// here rather than with std::random distributions, whose output is not
/// portable across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller.
    double normal();
    /// Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Derived independent stream (for sweep cells, epoch shuffles).
    RngStream substream(std::uint64_t id) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
};

Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi, RngStream& rng);
Matrix random_normal(std::size_t rows, std::size_t cols, double mean, double sd, RngStream& rng);
/// Entries drawn from {-1, +1}.
Matrix random_sign(std::size_t rows, std::size_t cols, RngStream& rng);

} // namespace score
