#include "vmsns/bubbles.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vmsns {

namespace {

SplineSpace1D bernstein(int degree) { return SplineSpace1D(degree, 0.0, 1.0, 1, KnotFlavor::open_clamped); }

Eigen::MatrixXd dense_derivative(const SplineSpace1D& space) { return Eigen::MatrixXd(derivative_map(space).map); }

}   // namespace

BubbleComplex::BubbleComplex(int kx, int ky)
    : kx_(kx), ky_(ky), bx_(bernstein(kx)), by_(bernstein(ky)), bx1_(bernstein(kx - 1)), by1_(bernstein(ky - 1))
{
}

BubbleComplex build_bubble_complex(int kx, int ky)
{
    if (kx < 2 || ky < 2) {
        throw std::invalid_argument("build_bubble_complex: fine degrees must be at least 2, got (" + std::to_string(kx) +
                                    ", " + std::to_string(ky) + ")");
    }
    return BubbleComplex(kx, ky);
}

BubbleValues BubbleComplex::eval_reference(std::span<const Point2> ref_points, double hx, double hy) const
{
    const int np = static_cast<int>(ref_points.size());
    BubbleValues v;
    v.w0.setZero(np, dim0());
    v.w0_dx.setZero(np, dim0());
    v.w0_dy.setZero(np, dim0());
    v.u_x.setZero(np, dim1());
    v.u_y.setZero(np, dim1());
    v.div.setZero(np, dim1());
    v.p.setZero(np, dim2());

    const int n2full = kx_ * ky_;
    const double mean = 1.0 / n2full;
    for (int q = 0; q < np; ++q) {
        const auto X = bx_.eval_all_on_element(0, ref_points[q].x, 1);
        const auto Y = by_.eval_all_on_element(0, ref_points[q].y, 1);
        const auto X1 = bx1_.eval_all_on_element(0, ref_points[q].x, 1);
        const auto Y1 = by1_.eval_all_on_element(0, ref_points[q].y, 1);

        for (int j = 1; j < ky_; ++j) {
            for (int i = 1; i < kx_; ++i) {
                const int c = (i - 1) + (j - 1) * (kx_ - 1);
                v.w0(q, c) = X[0][i] * Y[0][j];
                v.w0_dx(q, c) = X[1][i] * Y[0][j] / hx;
                v.w0_dy(q, c) = X[0][i] * Y[1][j] / hy;
            }
        }
        for (int j = 0; j < ky_; ++j) {
            for (int i = 1; i < kx_; ++i) {
                const int c = (i - 1) + j * (kx_ - 1);
                v.u_x(q, c) = X[0][i] * Y1[0][j];
                v.div(q, c) = X[1][i] * Y1[0][j] / hx;
            }
        }
        for (int j = 1; j < ky_; ++j) {
            for (int i = 0; i < kx_; ++i) {
                const int c = dim1x() + i + (j - 1) * kx_;
                v.u_y(q, c) = X1[0][i] * Y[0][j];
                v.div(q, c) = X1[0][i] * Y[1][j] / hy;
            }
        }
        for (int m = 0; m < n2full - 1; ++m) {
            v.p(q, m) = X1[0][m % kx_] * Y1[0][m / kx_] - mean;
        }
    }
    return v;
}

Eigen::MatrixXd BubbleComplex::rot_map(double hx, double hy) const
{
    const Eigen::MatrixXd dx = dense_derivative(bx_);
    const Eigen::MatrixXd dy = dense_derivative(by_);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(dim1(), dim0());
    for (int j = 1; j < ky_; ++j) {
        for (int i = 1; i < kx_; ++i) {
            const int c = (i - 1) + (j - 1) * (kx_ - 1);
            for (int l = 0; l < ky_; ++l) {
                r((i - 1) + l * (kx_ - 1), c) += dy(l, j) / hy;
            }
            for (int l = 0; l < kx_; ++l) {
                r(dim1x() + l + (j - 1) * kx_, c) -= dx(l, i) / hx;
            }
        }
    }
    return r;
}

Eigen::MatrixXd BubbleComplex::div_map(double hx, double hy) const
{
    const Eigen::MatrixXd dx = dense_derivative(bx_);
    const Eigen::MatrixXd dy = dense_derivative(by_);
    const int n2full = kx_ * ky_;
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n2full, dim1());
    for (int j = 0; j < ky_; ++j) {
        for (int i = 1; i < kx_; ++i) {
            const int c = (i - 1) + j * (kx_ - 1);
            for (int l = 0; l < kx_; ++l) {
                full(j * kx_ + l, c) += dx(l, i) / hx;
            }
        }
    }
    for (int j = 1; j < ky_; ++j) {
        for (int i = 0; i < kx_; ++i) {
            const int c = dim1x() + i + (j - 1) * kx_;
            for (int l = 0; l < ky_; ++l) {
                full(l * kx_ + i, c) += dy(l, j) / hy;
            }
        }
    }
    // zero-mean expansion: c_m = d_m - d_{N-1}
    Eigen::MatrixXd d = full.topRows(n2full - 1);
    d.rowwise() -= full.row(n2full - 1);
    return d;
}

BubbleValues eval_bubbles(const BubbleComplex& complex, const Mesh2D& mesh, int element, std::span<const Point2> points)
{
    if (element < 0 || element >= mesh.n_elements()) {
        throw std::out_of_range("eval_bubbles: element index " + std::to_string(element) + " out of range");
    }
    const int ex = element % mesh.nx;
    const int ey = element / mesh.nx;
    const double hx = mesh.hx();
    const double hy = mesh.hy();
    const double ox = mesh.x0 + ex * hx;
    const double oy = mesh.y0 + ey * hy;
    std::vector<Point2> ref;
    ref.reserve(points.size());
    const double slack = 1e-12;
    for (const auto& pt : points) {
        const double xi = (pt.x - ox) / hx;
        const double eta = (pt.y - oy) / hy;
        if (xi < -slack || xi > 1.0 + slack || eta < -slack || eta > 1.0 + slack) {
            throw std::domain_error("eval_bubbles: point (" + std::to_string(pt.x) + ", " + std::to_string(pt.y) +
                                    ") outside element " + std::to_string(element));
        }
        ref.push_back({std::clamp(xi, 0.0, 1.0), std::clamp(eta, 0.0, 1.0)});
    }
    return complex.eval_reference(ref, hx, hy);
}

}   // namespace vmsns
