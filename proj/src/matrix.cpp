#include "score/matrix.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace score {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c)
            throw ContractError("from_rows: ragged initializer (row " + std::to_string(i) + ")");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::vector<double> Matrix::col(std::size_t c) const {
    std::vector<double> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void Matrix::set_col(std::size_t c, std::span<const double> v) {
    if (v.size() != rows_)
        throw ContractError("set_col: length " + std::to_string(v.size()) + " vs " + shape_str());
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

void Matrix::set_row(std::size_t r, std::span<const double> v) {
    if (v.size() != cols_)
        throw ContractError("set_row: length " + std::to_string(v.size()) + " vs " + shape_str());
    for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = v[c];
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ContractError("matmul: dimension mismatch " + a.shape_str() + " * " + b.shape_str());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* orow = out.row(i).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row(k).data();
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix scaled(const Matrix& m, double s) {
    Matrix out = m;
    for (double& v : out.values()) v *= s;
    return out;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols())
        throw ContractError("matvec: " + a.shape_str() + " * vec" + std::to_string(x.size()));
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
    return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows())
        throw ContractError("matvec_t: " + a.shape_str() + "^T * vec" + std::to_string(x.size()));
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        const double* row = a.row(r).data();
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += xr * row[c];
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ContractError("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double frobenius_norm(const Matrix& m) { return norm2(m.values()); }

double max_abs(const Matrix& m) {
    double mx = 0.0;
    for (double v : m.values()) mx = std::max(mx, std::abs(v));
    return mx;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("max_abs_diff: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    double mx = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        mx = std::max(mx, std::abs(a.data()[i] - b.data()[i]));
    return mx;
}

void check_finite(const Matrix& m, const std::string& what) {
    for (double v : m.values())
        if (!std::isfinite(v)) throw NumericError("non-finite entry in " + what);
}

Matrix orthonormal_basis(const Matrix& columns, double tol) {
    std::vector<std::vector<double>> basis;
    for (std::size_t c = 0; c < columns.cols(); ++c) {
        std::vector<double> v = columns.col(c);
        // two MGS passes keep the basis orthonormal to working precision
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const double proj = dot(b, v);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
            }
        const double n = norm2(v);
        if (n <= tol) continue; // linearly dependent on previous columns
        for (double& x : v) x /= n;
        basis.push_back(std::move(v));
    }
    Matrix out(columns.rows(), basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) out.set_col(j, basis[j]);
    return out;
}

double distance_to_span(const Matrix& basis, std::span<const double> v) {
    if (basis.cols() == 0) return norm2(v);
    if (basis.rows() != v.size())
        throw ContractError("distance_to_span: vector length " + std::to_string(v.size()) +
                            " vs basis " + basis.shape_str());
    std::vector<double> r(v.begin(), v.end());
    const std::vector<double> coeff = matvec_t(basis, v);
    for (std::size_t j = 0; j < basis.cols(); ++j)
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= coeff[j] * basis(i, j);
    return norm2(r);
}

// ---------------------------------------------------------------------------
// RngStream
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256**
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw ContractError("RngStream::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

RngStream RngStream::substream(std::uint64_t id) const {
    std::uint64_t sm = seed_ ^ (0x9e3779b97f4a7c15ULL * (id + 1));
    return RngStream(splitmix64(sm));
}

Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi, RngStream& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

Matrix random_normal(std::size_t rows, std::size_t cols, double mean, double sd, RngStream& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = mean + sd * rng.normal();
    return m;
}

Matrix random_sign(std::size_t rows, std::size_t cols, RngStream& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    return m;
}

} // namespace score
