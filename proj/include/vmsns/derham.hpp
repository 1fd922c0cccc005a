#pragma once

#include "vmsns/bspline.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace vmsns {

/// Uniform tensor-product mesh of a rectangle. Element e = ey * nx + ex.
struct Mesh2D {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
    int nx = 1;
    int ny = 1;
    bool periodic_x = false;
    bool periodic_y = false;

    double hx() const { return (x1 - x0) / nx; }
    double hy() const { return (y1 - y0) / ny; }
    double h() const { return hx() > hy() ? hx() : hy(); }
    int n_elements() const { return nx * ny; }
    double area() const { return (x1 - x0) * (y1 - y0); }
    int element_index(int ex, int ey) const { return ey * nx + ex; }

    static Mesh2D unit_square(int n) { return Mesh2D{0.0, 1.0, 0.0, 1.0, n, n, false, false}; }
    static Mesh2D periodic_box(double length, int n) { return Mesh2D{0.0, length, 0.0, length, n, n, true, true}; }
};

enum class Side : std::uint8_t { left = 0, right = 1, bottom = 2, top = 3 };

constexpr std::uint8_t side_bit(Side s) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s)); }
constexpr std::array<Side, 4> all_sides{Side::left, Side::right, Side::bottom, Side::top};

/// Outward unit normal of a side.
Eigen::Vector2d outward_normal(Side s);

/// Partition of the non-periodic boundary into (pressure, normal-velocity)
/// and (tangential-velocity, vorticity) parts, stored as side bitmasks.
struct BoundarySpec {
    std::uint8_t pressure = 0;             // p = p_hat (natural)
    std::uint8_t normal_velocity = 0;      // u.n = u_hat (essential)
    std::uint8_t tangential_velocity = 0;  // u x n = u_hat_t (natural)
    std::uint8_t vorticity = 0;            // omega = omega_hat (essential)

    /// u.n and omega essential on every side: the complex with homogeneous traces.
    static BoundarySpec homogeneous_complex();
    /// Velocity Dirichlet on every side: u.n essential, u x n natural.
    static BoundarySpec velocity_dirichlet();
    /// No sides (fully periodic mesh).
    static BoundarySpec none() { return {}; }

    /// Throws std::invalid_argument unless each pair partitions the
    /// non-periodic sides of `mesh` disjointly.
    void validate(const Mesh2D& mesh) const;
    bool has(std::uint8_t mask, Side s) const { return (mask & side_bit(s)) != 0; }
};

using ScalarField = std::function<double(double, double, double)>;
using VectorField = std::function<Eigen::Vector2d(double, double, double)>;

/// Boundary data; empty functions mean homogeneous data.
struct BoundaryData {
    BoundarySpec spec;
    VectorField velocity;   // supplies u.n on the normal part and u x n on the tangential part
    ScalarField pressure;
    ScalarField vorticity;
};

/// Tensor product of two univariate spaces; index = iy * sx.dim() + ix.
struct TensorSpace2D {
    SplineSpace1D sx;
    SplineSpace1D sy;

    int dim() const { return sx.dim() * sy.dim(); }
    int index(int ix, int iy) const { return iy * sx.dim() + ix; }

    /// d^dx/dx^dx d^dy/dy^dy of the field at (x, y).
    double eval(std::span<const double> coeffs, double x, double y, int dx = 0, int dy = 0) const;
};

struct Point2 {
    double x;
    double y;
};

/// Evaluate a scalar tensor-product field at many points.
std::vector<double> eval_field(const TensorSpace2D& space, std::span<const double> coeffs,
                               std::span<const Point2> points, int dx = 0, int dy = 0);

/// Discrete 2D de Rham complex V0 --rot--> V1 --div--> V2 on a uniform mesh.
///
/// Coefficient vectors use the full (unrestricted) spaces; boundary conditions
/// are carried as masks of constrained degrees of freedom.
struct DeRhamSpaces2D {
    Mesh2D mesh;
    int kx = 1;
    int ky = 1;
    BoundarySpec bc;

    TensorSpace2D v0;    // vorticity, B_{kx,ky}
    TensorSpace2D v1x;   // velocity x-component, B_{kx,ky-1}
    TensorSpace2D v1y;   // velocity y-component, B_{kx-1,ky}
    TensorSpace2D v2;    // pressure, B_{kx-1,ky-1}

    std::vector<char> constrained0;   // omega trace on the vorticity boundary part
    std::vector<char> constrained1;   // normal velocity trace on the normal-velocity part
    bool mean_zero_pressure = true;

    Eigen::SparseMatrix<double> rot;  // dim1 x dim0
    Eigen::SparseMatrix<double> div;  // dim2 x dim1

    int dim0() const { return v0.dim(); }
    int dim1() const { return v1x.dim() + v1y.dim(); }
    int dim1x() const { return v1x.dim(); }
    int dim2() const { return v2.dim(); }

    int free_dim0() const;
    int free_dim1() const;
    int free_dim2() const { return dim2() - (mean_zero_pressure ? 1 : 0); }

    /// Velocity at (x, y) from V1 coefficients.
    Eigen::Vector2d velocity(std::span<const double> u, double x, double y) const;
    double divergence(std::span<const double> u, double x, double y) const;
    /// rot of a V0 field: (d/dy, -d/dx).
    Eigen::Vector2d rot_of(std::span<const double> w, double x, double y) const;
};

/// Throws std::invalid_argument for degrees below 1 or an invalid boundary partition.
DeRhamSpaces2D build_complex(const Mesh2D& mesh, int kx, int ky, const BoundarySpec& bc);

/// Coefficient map V0 -> V1 realizing rot w = (dw/dy, -dw/dx).
const Eigen::SparseMatrix<double>& rot_scalar_to_vector(const DeRhamSpaces2D& spaces);
/// Coefficient map V1 -> V2 realizing div.
const Eigen::SparseMatrix<double>& div_vector_to_scalar(const DeRhamSpaces2D& spaces);

/// Keep the rows/columns whose mask entry is zero.
Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& m, const std::vector<char>& row_constrained,
                                            const std::vector<char>& col_constrained);

}   // namespace vmsns
