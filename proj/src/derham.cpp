#include "vmsns/derham.hpp"

#include <stdexcept>
#include <string>

namespace vmsns {

Eigen::Vector2d outward_normal(Side s)
{
    switch (s) {
    case Side::left: return {-1.0, 0.0};
    case Side::right: return {1.0, 0.0};
    case Side::bottom: return {0.0, -1.0};
    case Side::top: return {0.0, 1.0};
    }
    return {0.0, 0.0};
}

BoundarySpec BoundarySpec::homogeneous_complex()
{
    BoundarySpec s;
    s.normal_velocity = 0xF;
    s.vorticity = 0xF;
    return s;
}

BoundarySpec BoundarySpec::velocity_dirichlet()
{
    BoundarySpec s;
    s.normal_velocity = 0xF;
    s.tangential_velocity = 0xF;
    return s;
}

void BoundarySpec::validate(const Mesh2D& mesh) const
{
    std::uint8_t sides = 0;
    if (!mesh.periodic_x) {
        sides |= side_bit(Side::left) | side_bit(Side::right);
    }
    if (!mesh.periodic_y) {
        sides |= side_bit(Side::bottom) | side_bit(Side::top);
    }
    const auto check = [sides](std::uint8_t a, std::uint8_t b, const char* what) {
        if ((a & b) != 0) {
            throw std::invalid_argument(std::string("boundary partition overlaps: ") + what);
        }
        if ((a | b) != sides) {
            throw std::invalid_argument(std::string("boundary partition does not cover the non-periodic boundary: ") +
                                        what);
        }
    };
    check(pressure, normal_velocity, "pressure / normal velocity");
    check(tangential_velocity, vorticity, "tangential velocity / vorticity");
}

double TensorSpace2D::eval(std::span<const double> coeffs, double x, double y, int dx, int dy) const
{
    const int ex = sx.knots().element_of(x);
    const int ey = sy.knots().element_of(y);
    const double xx = sx.periodic() ? sx.knots().wrap(x) : x;
    const double yy = sy.periodic() ? sy.knots().wrap(y) : y;
    const auto bx = sx.eval_all_on_element(ex, xx, dx);
    const auto by = sy.eval_all_on_element(ey, yy, dy);
    if (dx > sx.degree() || dy > sy.degree()) {
        return 0.0;
    }
    double v = 0.0;
    for (int b = 0; b <= sy.degree(); ++b) {
        const int iy = sy.global_index(ey, b);
        for (int a = 0; a <= sx.degree(); ++a) {
            const int ix = sx.global_index(ex, a);
            v += coeffs[index(ix, iy)] * bx[dx][a] * by[dy][b];
        }
    }
    return v;
}

std::vector<double> eval_field(const TensorSpace2D& space, std::span<const double> coeffs,
                               std::span<const Point2> points, int dx, int dy)
{
    if (static_cast<int>(coeffs.size()) != space.dim()) {
        throw std::invalid_argument("eval_field: coefficient count does not match space dimension");
    }
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        out.push_back(space.eval(coeffs, pt.x, pt.y, dx, dy));
    }
    return out;
}

int DeRhamSpaces2D::free_dim0() const
{
    int n = 0;
    for (char c : constrained0) {
        n += c ? 0 : 1;
    }
    return n;
}

int DeRhamSpaces2D::free_dim1() const
{
    int n = 0;
    for (char c : constrained1) {
        n += c ? 0 : 1;
    }
    return n;
}

Eigen::Vector2d DeRhamSpaces2D::velocity(std::span<const double> u, double x, double y) const
{
    return {v1x.eval(u.subspan(0, dim1x()), x, y), v1y.eval(u.subspan(dim1x()), x, y)};
}

double DeRhamSpaces2D::divergence(std::span<const double> u, double x, double y) const
{
    return v1x.eval(u.subspan(0, dim1x()), x, y, 1, 0) + v1y.eval(u.subspan(dim1x()), x, y, 0, 1);
}

Eigen::Vector2d DeRhamSpaces2D::rot_of(std::span<const double> w, double x, double y) const
{
    return {v0.eval(w, x, y, 0, 1), -v0.eval(w, x, y, 1, 0)};
}

namespace {

SplineSpace1D make_space(int degree, double lo, double hi, int n, bool periodic)
{
    return SplineSpace1D(degree, lo, hi, n, periodic ? KnotFlavor::periodic : KnotFlavor::open_clamped);
}

}   // namespace

DeRhamSpaces2D build_complex(const Mesh2D& mesh, int kx, int ky, const BoundarySpec& bc)
{
    if (kx < 1 || ky < 1) {
        throw std::invalid_argument("build_complex: degrees must be at least 1");
    }
    bc.validate(mesh);

    const SplineSpace1D sxk = make_space(kx, mesh.x0, mesh.x1, mesh.nx, mesh.periodic_x);
    const SplineSpace1D syk = make_space(ky, mesh.y0, mesh.y1, mesh.ny, mesh.periodic_y);
    const DerivativeMap dx = derivative_map(sxk);
    const DerivativeMap dy = derivative_map(syk);

    DeRhamSpaces2D s{mesh,
                     kx,
                     ky,
                     bc,
                     TensorSpace2D{sxk, syk},
                     TensorSpace2D{sxk, dy.derived_space},
                     TensorSpace2D{dx.derived_space, syk},
                     TensorSpace2D{dx.derived_space, dy.derived_space},
                     {},
                     {},
                     bc.pressure == 0,
                     {},
                     {}};

    const int n0 = s.dim0();
    const int n1x = s.dim1x();
    const int n1 = s.dim1();
    const int n2 = s.dim2();

    // rot w = (d_y w, -d_x w)
    std::vector<Eigen::Triplet<double>> trip;
    for (int ix = 0; ix < sxk.dim(); ++ix) {
        for (int k = 0; k < dy.map.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(dy.map, k); it; ++it) {
                trip.emplace_back(s.v1x.index(ix, static_cast<int>(it.row())), s.v0.index(ix, static_cast<int>(it.col())),
                                  it.value());
            }
        }
    }
    for (int iy = 0; iy < syk.dim(); ++iy) {
        for (int k = 0; k < dx.map.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(dx.map, k); it; ++it) {
                trip.emplace_back(n1x + s.v1y.index(static_cast<int>(it.row()), iy),
                                  s.v0.index(static_cast<int>(it.col()), iy), -it.value());
            }
        }
    }
    s.rot.resize(n1, n0);
    s.rot.setFromTriplets(trip.begin(), trip.end());
    s.rot.prune(0.0);

    // div u = d_x u_x + d_y u_y
    trip.clear();
    for (int iy = 0; iy < dy.derived_space.dim(); ++iy) {
        for (int k = 0; k < dx.map.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(dx.map, k); it; ++it) {
                trip.emplace_back(s.v2.index(static_cast<int>(it.row()), iy), s.v1x.index(static_cast<int>(it.col()), iy),
                                  it.value());
            }
        }
    }
    for (int ix = 0; ix < dx.derived_space.dim(); ++ix) {
        for (int k = 0; k < dy.map.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(dy.map, k); it; ++it) {
                trip.emplace_back(s.v2.index(ix, static_cast<int>(it.row())),
                                  n1x + s.v1y.index(ix, static_cast<int>(it.col())), it.value());
            }
        }
    }
    s.div.resize(n2, n1);
    s.div.setFromTriplets(trip.begin(), trip.end());
    s.div.prune(0.0);

    // essential trace masks
    s.constrained0.assign(n0, 0);
    s.constrained1.assign(n1, 0);
    const int d0x = s.v0.sx.dim();
    const int d0y = s.v0.sy.dim();
    for (Side side : all_sides) {
        if (bc.has(bc.vorticity, side)) {
            for (int iy = 0; iy < d0y; ++iy) {
                for (int ix = 0; ix < d0x; ++ix) {
                    const bool on = (side == Side::left && ix == 0) || (side == Side::right && ix == d0x - 1) ||
                                    (side == Side::bottom && iy == 0) || (side == Side::top && iy == d0y - 1);
                    if (on) {
                        s.constrained0[s.v0.index(ix, iy)] = 1;
                    }
                }
            }
        }
        if (bc.has(bc.normal_velocity, side)) {
            if (side == Side::left || side == Side::right) {
                const int ix = side == Side::left ? 0 : s.v1x.sx.dim() - 1;
                for (int iy = 0; iy < s.v1x.sy.dim(); ++iy) {
                    s.constrained1[s.v1x.index(ix, iy)] = 1;
                }
            }
            else {
                const int iy = side == Side::bottom ? 0 : s.v1y.sy.dim() - 1;
                for (int ix = 0; ix < s.v1y.sx.dim(); ++ix) {
                    s.constrained1[n1x + s.v1y.index(ix, iy)] = 1;
                }
            }
        }
    }
    return s;
}

const Eigen::SparseMatrix<double>& rot_scalar_to_vector(const DeRhamSpaces2D& spaces) { return spaces.rot; }

const Eigen::SparseMatrix<double>& div_vector_to_scalar(const DeRhamSpaces2D& spaces) { return spaces.div; }

Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& m, const std::vector<char>& row_constrained,
                                            const std::vector<char>& col_constrained)
{
    std::vector<int> row_map(m.rows(), -1);
    std::vector<int> col_map(m.cols(), -1);
    int nr = 0;
    int nc = 0;
    for (int i = 0; i < m.rows(); ++i) {
        if (row_constrained.empty() || !row_constrained[i]) {
            row_map[i] = nr++;
        }
    }
    for (int j = 0; j < m.cols(); ++j) {
        if (col_constrained.empty() || !col_constrained[j]) {
            col_map[j] = nc++;
        }
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < m.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
            const int r = row_map[it.row()];
            const int c = col_map[it.col()];
            if (r >= 0 && c >= 0) {
                trip.emplace_back(r, c, it.value());
            }
        }
    }
    Eigen::SparseMatrix<double> out(nr, nc);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}   // namespace vmsns
