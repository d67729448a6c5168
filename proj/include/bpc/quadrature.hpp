#pragma once

#include <vector>

#include "bpc/common.hpp"

namespace bpc {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
QuadratureRule gauss_legendre(int n);

// Composite Gauss-Legendre rule over [lo, hi] with approximately total_nodes
// nodes split across panels of at most 48 nodes each.
QuadratureRule composite_gauss_legendre(int total_nodes, double lo, double hi);

}  // namespace bpc
