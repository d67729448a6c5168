#include "bpc/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace bpc {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: node count must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess for the i-th root of P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Recurrence for P_n(x) and P'_n(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

QuadratureRule composite_gauss_legendre(int total_nodes, double lo, double hi) {
    if (!(hi > lo)) throw ValidationError("composite_gauss_legendre: empty interval");
    if (total_nodes < 1) throw ValidationError("composite_gauss_legendre: node count must be positive");
    const int panels = (total_nodes + 47) / 48;
    QuadratureRule out;
    out.nodes.reserve(total_nodes);
    out.weights.reserve(total_nodes);
    const double panel_width = (hi - lo) / panels;
    int assigned = 0;
    for (int p = 0; p < panels; ++p) {
        const int count = (total_nodes - assigned) / (panels - p);
        assigned += count;
        const double a = lo + p * panel_width;
        const double b = a + panel_width;
        const QuadratureRule base = gauss_legendre(count);
        const double mid = 0.5 * (a + b);
        const double halfw = 0.5 * (b - a);
        for (size_t i = 0; i < base.size(); ++i) {
            out.nodes.push_back(mid + halfw * base.nodes[i]);
            out.weights.push_back(halfw * base.weights[i]);
        }
    }
    return out;
}

}  // namespace bpc
