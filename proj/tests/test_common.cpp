#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bpc/common.hpp"

using namespace bpc;

TEST_CASE("matrix products and dot") {
    Matrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    Vec x{1.0, -1.0};
    const Vec y = left_mul(x, a);
    CHECK(y[0] == doctest::Approx(-3.0));
    CHECK(y[1] == doctest::Approx(-3.0));
    CHECK(y[2] == doctest::Approx(-3.0));

    Vec z{1.0, 0.0, 2.0};
    const Vec w = right_mul(a, z);
    CHECK(w[0] == doctest::Approx(7.0));
    CHECK(w[1] == doctest::Approx(16.0));

    CHECK(dot(Vec{1, 2, 3}, Vec{4, 5, 6}) == doctest::Approx(32.0));

    Matrix b(3, 2);
    b(0, 0) = 1; b(1, 1) = 1; b(2, 0) = 1;
    const Matrix ab = mat_mul(a, b);
    CHECK(ab.rows == 2);
    CHECK(ab.cols == 2);
    CHECK(ab(0, 0) == doctest::Approx(4.0));
    CHECK(ab(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("expm matches the closed form for an absorbing generator") {
    // Generator with exits 0 -> 1 at rate l1, 0 -> 2 at rate l2, states 1,2 absorbing.
    const double l1 = 0.01, l2 = 0.02, h = 1.0;
    const double lambda = l1 + l2;
    Matrix g(3, 3);
    g(0, 0) = -lambda;
    g(0, 1) = l1;
    g(0, 2) = l2;
    Matrix gh = g;
    for (double& v : gh.data) v *= h;
    const Matrix p = expm(gh);

    const double decay = std::exp(-lambda * h);
    CHECK(p(0, 0) == doctest::Approx(decay).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx((1.0 - decay) * l1 / lambda).epsilon(1e-12));
    CHECK(p(0, 2) == doctest::Approx((1.0 - decay) * l2 / lambda).epsilon(1e-12));
    for (int i = 1; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(p(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("expm of zero matrix is the identity") {
    const Matrix e = expm(Matrix(3, 3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(e(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("expm_integral matches a fine Riemann sum") {
    Matrix g(3, 3);
    g(0, 0) = -0.03; g(0, 1) = 0.01; g(0, 2) = 0.02;
    g(1, 1) = -0.05; g(1, 2) = 0.05;  // inter-transition 1 -> 2
    const double h = 1.7;
    const Matrix occ = expm_integral(g, h);

    const int steps = 20000;
    Matrix ref(3, 3);
    for (int s = 0; s < steps; ++s) {
        const double t = (s + 0.5) * h / steps;
        Matrix gt = g;
        for (double& v : gt.data) v *= t;
        const Matrix e = expm(gt);
        for (size_t i = 0; i < ref.data.size(); ++i) ref.data[i] += e.data[i] * h / steps;
    }
    for (size_t i = 0; i < ref.data.size(); ++i)
        CHECK(occ.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-8));

    // Rows of the occupancy matrix sum to the interval length.
    for (int i = 0; i < 3; ++i) {
        double row = 0.0;
        for (int j = 0; j < 3; ++j) row += occ(i, j);
        CHECK(row == doctest::Approx(h).epsilon(1e-10));
    }
}

TEST_CASE("error types carry their messages") {
    CHECK_THROWS_WITH_AS(throw ValidationError("field: bad"), "field: bad", ValidationError);
    CHECK_THROWS_AS(throw NumericalError("x"), NumericalError);
    CHECK_THROWS_AS(throw CapacityError("x"), CapacityError);
}
