#include <doctest.h>

#include <cmath>

#include "score/losses.hpp"
#include "score/matrix.hpp"
#include "test_util.hpp"

using namespace score;
using namespace score::test;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("matmul identity and hand arithmetic") {
    RngStream rng(7);
    const Matrix b = random_uniform(3, 4, -2.0, 2.0, rng);
    CHECK(matmul(Matrix::identity(3), b) == b);

    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix v = Matrix::from_rows({{0}, {1}});
    const Matrix r = matmul(a, v);
    CHECK(r(0, 0) == 2.0);
    CHECK(r(1, 0) == 4.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
    RngStream rng(11);
    const Matrix a = random_normal(7, 5, 0.0, 1.0, rng);
    const Matrix b = random_normal(5, 3, 0.0, 1.0, rng);
    CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("matmul dimension mismatch names both shapes") {
    const Matrix a(2, 3), b(4, 2);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), ContractError);
    try {
        matmul(a, b);
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find("4x2") != std::string::npos);
    }
}

TEST_CASE("matmul associativity on random conformable triples") {
    RngStream rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 2 + rng.below(6), n = 2 + rng.below(6), p = 2 + rng.below(6),
                          q = 2 + rng.below(6);
        const Matrix a = random_normal(m, n, 0.0, 1.0, rng);
        const Matrix b = random_normal(n, p, 0.0, 1.0, rng);
        const Matrix c = random_normal(p, q, 0.0, 1.0, rng);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        const double scale = std::max(1.0, frobenius_norm(left));
        CHECK(max_abs_diff(left, right) / scale < 1e-9);
    }
}

TEST_CASE("sigmoid closed forms and stability") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(near(sigmoid(-std::log(3.0)), 0.25, 1e-15));
    const double tiny = sigmoid(-800.0);
    CHECK(tiny > 0.0);
    CHECK(tiny <= 1e-300);
    CHECK(std::isfinite(tiny));
    CHECK(sigmoid(800.0) < 1.0);
}

TEST_CASE("sigmoid symmetry") {
    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-30.0, 30.0);
        CHECK(near(sigmoid(x) + sigmoid(-x), 1.0, 1e-15));
    }
}

TEST_CASE("softmax cross-entropy closed forms") {
    const std::vector<double> uniform{1.7, 1.7, 1.7, 1.7};
    for (std::size_t label = 0; label < 4; ++label)
        CHECK(near(softmax_xent(uniform, label).loss, std::log(4.0), 1e-12));

    const std::vector<double> two{1.0, 0.0};
    CHECK(near(softmax_xent(two, 0).loss, std::log1p(std::exp(-1.0)), 1e-12));

    const std::vector<double> dominant{1000.0, 0.0};
    const auto sx = softmax_xent(dominant, 0);
    CHECK(std::isfinite(sx.loss));
    CHECK(sx.loss < 1e-300);
}

TEST_CASE("softmax label contract") {
    const std::vector<double> v{0.0, 1.0};
    CHECK_THROWS_AS(softmax_xent(v, 2), ContractError);
    CHECK_THROWS_AS(softmax_xent(std::vector<double>{}, 0), ContractError);
}

TEST_CASE("softmax sums to one and is shift invariant") {
    RngStream rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> logits(3 + rng.below(5));
        for (double& v : logits) v = rng.uniform(-4.0, 4.0);
        const auto p = softmax(logits);
        double sum = 0.0;
        for (double v : p) sum += v;
        CHECK(near(sum, 1.0, 1e-12));

        const double shift = rng.uniform(-50.0, 50.0);
        std::vector<double> shifted = logits;
        for (double& v : shifted) v += shift;
        const auto p2 = softmax(shifted);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(near(p[i], p2[i], 1e-12));
    }
}

TEST_CASE("binary cross-entropy closed forms") {
    CHECK(near(binary_xent(0.5, 1.0), std::log(2.0), 1e-15));
    CHECK(near(binary_xent(0.25, 1.0), std::log(4.0), 1e-15));
    CHECK(near(binary_xent(0.25, 0.5), 0.5 * std::log(4.0) + 0.5 * std::log(4.0 / 3.0), 1e-15));
}

TEST_CASE("binary cross-entropy is minimized at a = s") {
    for (const double s : {0.0, 0.25, 0.5, 1.0}) {
        const double at_s = binary_xent(s, s);
        for (int i = 0; i <= 1000; ++i) {
            const double a = static_cast<double>(i) / 1000.0;
            CHECK(binary_xent(a, s) >= at_s - 1e-12);
        }
    }
}

TEST_CASE("finite differences: quadratic and constant") {
    const auto half_norm2 = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return 0.5 * s;
    };
    const std::vector<double> point{1.0, -2.0};
    const auto g = finite_diff_grad(half_norm2, point, 1e-5);
    CHECK(near(g[0], 1.0, 1e-9));
    CHECK(near(g[1], -2.0, 1e-9));

    const auto constant = [](std::span<const double>) { return 3.25; };
    for (double v : finite_diff_grad(constant, point, 1e-5)) CHECK(v == 0.0);

    const auto bad = [](std::span<const double> x) {
        return x[1] > 2.0 ? std::nan("") : 0.0;
    };
    CHECK_THROWS_WITH_AS(finite_diff_grad(bad, point, 1e-4), doctest::Contains("coordinate 1"),
                         NumericError);
    CHECK_THROWS_AS(finite_diff_grad(constant, point, 0.0), ContractError);
}

TEST_CASE("rng streams reproduce bit-for-bit") {
    RngStream a(42), b(42);
    const Matrix ma = random_normal(8, 5, 0.0, 1.0, a);
    const Matrix mb = random_normal(8, 5, 0.0, 1.0, b);
    CHECK(ma == mb);

    RngStream c(43);
    CHECK_FALSE(random_normal(8, 5, 0.0, 1.0, c) == ma);

    // substreams are distinct from the parent and from one another
    RngStream p(7);
    RngStream s1 = p.substream(0), s2 = p.substream(1);
    CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng uniform and below ranges") {
    RngStream rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.below(7) < 7);
    }
}

TEST_CASE("orthonormal basis spans and ranks") {
    RngStream rng(17);
    const Matrix cols = random_normal(6, 3, 0.0, 1.0, rng);
    const Matrix basis = orthonormal_basis(cols);
    CHECK(basis.cols() == 3);
    // an in-span combination has zero distance
    std::vector<double> v(6, 0.0);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t r = 0; r < 6; ++r) v[r] += (1.0 + static_cast<double>(c)) * cols(r, c);
    CHECK(distance_to_span(basis, v) < 1e-9);

    // duplicated column does not raise the rank
    Matrix dup(6, 4);
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t c = 0; c < 3; ++c) dup(r, c) = cols(r, c);
        dup(r, 3) = cols(r, 0);
    }
    CHECK(orthonormal_basis(dup).cols() == 3);
}

TEST_SUITE_END();
