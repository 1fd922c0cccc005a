#pragma once

#include <vector>

namespace vmsns {

/// Gauss-Legendre rule on the reference interval [0, 1]; exact for
/// polynomials up to degree 2 * n_points - 1.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    int size() const { return static_cast<int>(points.size()); }
};

QuadratureRule gauss_legendre(int n_points);

}   // namespace vmsns
