#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "anygraph/rng.hpp"
#include "testkit.hpp"

using anygraph::DenseMatrix;
using anygraph::RngStream;

// The oracles themselves are property-tested on closed-form cases before any
// other suite is allowed to trust them.

TEST_CASE("exact_svd_small on diagonal matrices") {
    DenseMatrix m(3, 3, 0.0);
    m(0, 0) = 3.0;
    m(1, 1) = 2.0;
    m(2, 2) = 1.0;
    auto f = testkit::exact_svd_small(m);
    REQUIRE(f.s.size() == 3);
    CHECK(f.s[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.s[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.s[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact_svd_small on a rank-1 outer product") {
    const std::vector<double> u = {1.0, -2.0, 0.5};
    const std::vector<double> v = {3.0, 4.0};
    DenseMatrix m(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) m(i, j) = u[i] * v[j];
    const double nu = std::sqrt(1.0 + 4.0 + 0.25);
    const double nv = 5.0;
    auto f = testkit::exact_svd_small(m);
    CHECK(f.s[0] == doctest::Approx(nu * nv).epsilon(1e-12));
    CHECK(f.s[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("exact_svd_small factors are orthonormal") {
    RngStream rng(11, "test:oracle-orth");
    DenseMatrix m(10, 7);
    for (double& x : m.data) x = rng.next_normal();
    auto f = testkit::exact_svd_small(m);
    auto utu = anygraph::matmul_tn(f.u, f.u);
    auto vtv = anygraph::matmul_tn(f.v, f.v);
    for (std::size_t i = 0; i < utu.rows; ++i)
        for (std::size_t j = 0; j < utu.cols; ++j) {
            CHECK(std::abs(utu(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
            CHECK(std::abs(vtv(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
}

TEST_CASE("exact_svd_small rejects matrices over the size cap") {
    DenseMatrix m(65, 3, 0.0);
    CHECK_THROWS(testkit::exact_svd_small(m));
}

TEST_CASE("finite_diff_grad closed forms") {
    SUBCASE("quadratic is exact") {
        auto f = [](const std::vector<double>& x) { return x[0] * x[0]; };
        auto g = testkit::finite_diff_grad(f, {3.0}, 1e-5);
        CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-9));
    }
    SUBCASE("zero function has zero gradient") {
        auto f = [](const std::vector<double>&) { return 0.0; };
        auto g = testkit::finite_diff_grad(f, {1.0, -2.0, 0.0}, 1e-5);
        for (double v : g) CHECK(v == 0.0);
    }
    SUBCASE("multivariate cubic") {
        auto f = [](const std::vector<double>& x) {
            return x[0] * x[0] * x[1] + std::sin(x[1]);
        };
        auto g = testkit::finite_diff_grad(f, {2.0, 0.5}, 1e-6);
        CHECK(g[0] == doctest::Approx(2.0 * 2.0 * 0.5).epsilon(1e-7));
        CHECK(g[1] == doctest::Approx(4.0 + std::cos(0.5)).epsilon(1e-7));
    }
}

TEST_CASE("brute_force_softmax_loss closed forms") {
    SUBCASE("uniform scores give log of the candidate count") {
        const double got = testkit::brute_force_softmax_loss({{0.7, 0.7, 0.7, 0.7}}, {2});
        CHECK(got == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    }
    SUBCASE("hand-computed three-way case") {
        // -log(e / (e + 2)) = log(1 + 2/e)
        const double want = std::log(1.0 + 2.0 / std::exp(1.0));
        const double got = testkit::brute_force_softmax_loss({{1.0, 0.0, 0.0}}, {0});
        CHECK(got == doctest::Approx(want).epsilon(1e-14));
        CHECK(got == doctest::Approx(0.551445).epsilon(1e-6));
    }
    SUBCASE("rows are averaged") {
        const double a = testkit::brute_force_softmax_loss({{1.0, 0.0}}, {0});
        const double b = testkit::brute_force_softmax_loss({{2.0, -1.0, 0.5}}, {1});
        const double both =
            testkit::brute_force_softmax_loss({{1.0, 0.0}, {2.0, -1.0, 0.5}}, {0, 1});
        CHECK(both == doctest::Approx(0.5 * (a + b)).epsilon(1e-14));
    }
    SUBCASE("rejects scores outside the validity range") {
        CHECK_THROWS(testkit::brute_force_softmax_loss({{31.0, 0.0}}, {0}));
        CHECK_THROWS(testkit::brute_force_softmax_loss({{0.0, -30.5}}, {0}));
    }
}

TEST_CASE("statistical helpers") {
    CHECK(testkit::mean({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.5));
    CHECK(testkit::sample_stddev({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) ==
          doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
    CHECK_THROWS(testkit::mean({}));
    CHECK_THROWS(testkit::sample_stddev({1.0}));
}

TEST_CASE("comparison helpers") {
    DenseMatrix a(2, 2, 1.0), b(2, 2, 1.0);
    b(1, 1) = 1.5;
    CHECK_FALSE(testkit::compare_matrices(a, b, 0.1).ok);
    CHECK(testkit::compare_matrices(a, b, 0.6).ok);

    DenseMatrix c(2, 1), d(2, 1);
    c(0, 0) = 1.0;
    c(1, 0) = -2.0;
    d(0, 0) = -1.0;
    d(1, 0) = 2.0;  // same column, opposite sign
    CHECK(testkit::compare_columns_up_to_sign(c, d, 1e-12).ok);

    CHECK(testkit::compare_grads({1.0, 1e-9}, {1.0001, 0.0}, 2e-4, 1e-4).ok);
    CHECK_FALSE(testkit::compare_grads({1.0}, {1.1}, 1e-4, 1e-4).ok);
}
