#pragma once

#include <vector>

namespace fraclab {

struct QuadRule {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with n points, mapped to [0, 1]. Cached per n.
const QuadRule& gauss_legendre(int n);

}  // namespace fraclab
