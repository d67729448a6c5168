#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bpc/quadrature.hpp"

using namespace bpc;

TEST_CASE("gauss_legendre weights sum to 2 and nodes are symmetric") {
    for (int n : {4, 16, 48}) {
        const QuadratureRule r = gauss_legendre(n);
        REQUIRE(r.size() == static_cast<size_t>(n));
        double wsum = 0.0, nsum = 0.0;
        for (size_t i = 0; i < r.size(); ++i) {
            wsum += r.weights[i];
            nsum += r.nodes[i];
        }
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(nsum == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("gauss_legendre integrates polynomials up to degree 2n-1 exactly") {
    const int n = 6;
    const QuadratureRule r = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
        double got = 0.0;
        for (size_t i = 0; i < r.size(); ++i) got += r.weights[i] * std::pow(r.nodes[i], deg);
        const double want = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("composite rule covers the requested range") {
    const QuadratureRule r = composite_gauss_legendre(96, -3.0, 5.0);
    double wsum = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        wsum += r.weights[i];
        CHECK(r.nodes[i] > -3.0);
        CHECK(r.nodes[i] < 5.0);
    }
    CHECK(wsum == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("composite rule integrates a normal density to one") {
    const double mean = 1.0, var = 2.0;
    const QuadratureRule r =
        composite_gauss_legendre(96, mean - 8.0 * std::sqrt(var), mean + 8.0 * std::sqrt(var));
    double mass = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        const double y = r.nodes[i];
        mass += r.weights[i] * std::exp(-(y - mean) * (y - mean) / (2.0 * var)) /
                std::sqrt(2.0 * std::numbers::pi * var);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("composite rule splits into panels of at most 48 nodes") {
    const QuadratureRule r = composite_gauss_legendre(96, 0.0, 1.0);
    CHECK(r.size() >= 96);
    // x^3 over [0,1]
    double got = 0.0;
    for (size_t i = 0; i < r.size(); ++i) got += r.weights[i] * r.nodes[i] * r.nodes[i] * r.nodes[i];
    CHECK(got == doctest::Approx(0.25).epsilon(1e-13));
}
