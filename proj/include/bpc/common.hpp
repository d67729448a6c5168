#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bpc {

using Vec = std::vector<double>;

// Dense row-major matrix, small (states are N+1 with N typically 1..3).
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

// y = x' M  (row vector times matrix)
Vec left_mul(const Vec& x, const Matrix& m);
// y = M x
Vec right_mul(const Matrix& m, const Vec& x);
double dot(const Vec& a, const Vec& b);
Matrix mat_mul(const Matrix& a, const Matrix& b);

// exp(A) by scaling-and-squaring with a Taylor core; adequate for the
// tiny generator matrices used here.
Matrix expm(const Matrix& a);

// Integral of exp(A t) dt over [0, h], via the augmented-matrix trick.
Matrix expm_integral(const Matrix& a, double h);

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bpc
