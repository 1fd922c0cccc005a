#pragma once

#include "vmsns/bspline.hpp"
#include "vmsns/derham.hpp"

#include <Eigen/Dense>

#include <span>

namespace vmsns {

/// Basis values of the fine-scale complex at a set of points of one element.
/// Each matrix has one row per point and one column per basis function.
struct BubbleValues {
    Eigen::MatrixXd w0;      // W0 values
    Eigen::MatrixXd w0_dx;
    Eigen::MatrixXd w0_dy;
    Eigen::MatrixXd u_x;     // W1 x-components
    Eigen::MatrixXd u_y;     // W1 y-components
    Eigen::MatrixXd div;     // W1 divergence
    Eigen::MatrixXd p;       // W2 values
};

/// Reference-element bubble complex W0 --rot--> W1 --div--> W2 on [0,1]^2,
/// built from the Bernstein basis of degree (kx, ky).
///
/// Local numbering:
///   W0   (i-1) + (j-1)(kx-1),      i = 1..kx-1, j = 1..ky-1   [B^kx_i B^ky_j]
///   W1x  (i-1) + j(kx-1),          i = 1..kx-1, j = 0..ky-1   [B^kx_i B^(ky-1)_j, 0]
///   W1y  dim1x + i + (j-1)kx,      i = 0..kx-1, j = 1..ky-1   [0, B^(kx-1)_i B^ky_j]
///   W2   m = j kx + i (m < kx ky - 1) with b_m - 1/(kx ky)
class BubbleComplex {
public:
    BubbleComplex(int kx, int ky);

    int kx() const { return kx_; }
    int ky() const { return ky_; }
    int dim0() const { return (kx_ - 1) * (ky_ - 1); }
    int dim1x() const { return (kx_ - 1) * ky_; }
    int dim1y() const { return kx_ * (ky_ - 1); }
    int dim1() const { return dim1x() + dim1y(); }
    int dim2() const { return kx_ * ky_ - 1; }
    int dim() const { return dim0() + dim1() + dim2(); }

    /// Values at reference points (xi, eta) in [0,1]^2 for an element of size hx x hy.
    BubbleValues eval_reference(std::span<const Point2> ref_points, double hx, double hy) const;

    /// Coefficient map W0 -> W1 of rot on an element of size hx x hy.
    Eigen::MatrixXd rot_map(double hx, double hy) const;
    /// Coefficient map W1 -> W2 of div on an element of size hx x hy.
    Eigen::MatrixXd div_map(double hx, double hy) const;

private:
    int kx_;
    int ky_;
    SplineSpace1D bx_;    // degree kx on [0,1], one element
    SplineSpace1D by_;
    SplineSpace1D bx1_;   // degree kx-1
    SplineSpace1D by1_;
};

/// Throws std::invalid_argument when min(kx, ky) < 2.
BubbleComplex build_bubble_complex(int kx, int ky);

/// Values on physical element `element` of `mesh` at physical points.
/// Throws std::domain_error for points outside the element.
BubbleValues eval_bubbles(const BubbleComplex& complex, const Mesh2D& mesh, int element, std::span<const Point2> points);

}   // namespace vmsns
