#include "bpc/common.hpp"

#include <cassert>
#include <cmath>

namespace bpc {

Vec left_mul(const Vec& x, const Matrix& m) {
    assert(static_cast<int>(x.size()) == m.rows);
    Vec y(m.cols, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (int c = 0; c < m.cols; ++c) y[c] += xr * m(r, c);
    }
    return y;
}

Vec right_mul(const Matrix& m, const Vec& x) {
    assert(static_cast<int>(x.size()) == m.cols);
    Vec y(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += m(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.rows);
    Matrix out(a.rows, b.cols);
    for (int r = 0; r < a.rows; ++r)
        for (int k = 0; k < a.cols; ++k) {
            const double ark = a(r, k);
            if (ark == 0.0) continue;
            for (int c = 0; c < b.cols; ++c) out(r, c) += ark * b(k, c);
        }
    return out;
}

namespace {

double inf_norm(const Matrix& a) {
    double best = 0.0;
    for (int r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < a.cols; ++c) s += std::fabs(a(r, c));
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

Matrix expm(const Matrix& a) {
    assert(a.rows == a.cols);
    const int n = a.rows;
    int squarings = 0;
    double norm = inf_norm(a);
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    Matrix scaled = a;
    const double scale = std::ldexp(1.0, -squarings);
    for (double& v : scaled.data) v *= scale;

    // Taylor series; with ||scaled|| <= 1/2 about 20 terms reach machine precision.
    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 24; ++k) {
        term = mat_mul(term, scaled);
        const double inv = 1.0 / k;
        for (size_t i = 0; i < term.data.size(); ++i) {
            term.data[i] *= inv;
            result.data[i] += term.data[i];
        }
    }
    for (int s = 0; s < squarings; ++s) result = mat_mul(result, result);
    return result;
}

Matrix expm_integral(const Matrix& a, double h) {
    assert(a.rows == a.cols);
    const int n = a.rows;
    // exp([[A, I], [0, 0]] h) has the integral of exp(A t) dt in its top-right block.
    Matrix aug(2 * n, 2 * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) aug(r, c) = a(r, c) * h;
        aug(r, n + r) = h;
    }
    Matrix e = expm(aug);
    Matrix out(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) out(r, c) = e(r, n + c);
    return out;
}

}  // namespace bpc
