#include "vmsns/boundary.hpp"

#include "vmsns/quadrature.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace vmsns {

namespace {

/// One side of the rectangle seen as a 1D spline trace: the basis functions
/// of `space` along the side, mapped to DOF indices by `dof`.
struct Trace {
    const SplineSpace1D* space;
    bool along_x;
    double fixed;
    std::vector<int> dof;
};

Trace v0_trace(const DeRhamSpaces2D& s, Side side, int off)
{
    const auto& sp = s.v0;
    Trace t{nullptr, false, 0.0, {}};
    if (side == Side::left || side == Side::right) {
        const int ix = side == Side::left ? 0 : sp.sx.dim() - 1;
        t.space = &sp.sy;
        t.fixed = side == Side::left ? s.mesh.x0 : s.mesh.x1;
        for (int iy = 0; iy < sp.sy.dim(); ++iy) {
            t.dof.push_back(off + sp.index(ix, iy));
        }
    }
    else {
        const int iy = side == Side::bottom ? 0 : sp.sy.dim() - 1;
        t.space = &sp.sx;
        t.along_x = true;
        t.fixed = side == Side::bottom ? s.mesh.y0 : s.mesh.y1;
        for (int ix = 0; ix < sp.sx.dim(); ++ix) {
            t.dof.push_back(off + sp.index(ix, iy));
        }
    }
    return t;
}

/// Normal-component trace of V1 on a side.
Trace v1_normal_trace(const DeRhamSpaces2D& s, Side side, int off)
{
    Trace t{nullptr, false, 0.0, {}};
    if (side == Side::left || side == Side::right) {
        const auto& sp = s.v1x;
        const int ix = side == Side::left ? 0 : sp.sx.dim() - 1;
        t.space = &sp.sy;
        t.fixed = side == Side::left ? s.mesh.x0 : s.mesh.x1;
        for (int iy = 0; iy < sp.sy.dim(); ++iy) {
            t.dof.push_back(off + sp.index(ix, iy));
        }
    }
    else {
        const auto& sp = s.v1y;
        const int iy = side == Side::bottom ? 0 : sp.sy.dim() - 1;
        t.space = &sp.sx;
        t.along_x = true;
        t.fixed = side == Side::bottom ? s.mesh.y0 : s.mesh.y1;
        for (int ix = 0; ix < sp.sx.dim(); ++ix) {
            t.dof.push_back(off + s.dim1x() + sp.index(ix, iy));
        }
    }
    return t;
}

/// Visit the Gauss points of a trace: fn(x, y, weight, first local index, values).
template <class Fn>
void for_edge_points(const Trace& t, int n_gauss, Fn&& fn)
{
    const QuadratureRule rule = gauss_legendre(n_gauss);
    const SplineSpace1D& sp = *t.space;
    const double h = sp.knots().element_size();
    for (int e = 0; e < sp.n_elements(); ++e) {
        for (int q = 0; q < rule.size(); ++q) {
            const double s = sp.knots().lower() + (e + rule.points[q]) * h;
            const auto vals = sp.eval_all_on_element(e, s, 0);
            const double x = t.along_x ? s : t.fixed;
            const double y = t.along_x ? t.fixed : s;
            fn(x, y, rule.weights[q] * h, e, vals[0]);
        }
    }
}

int edge_gauss(const DeRhamSpaces2D& s) { return std::max(s.kx, s.ky) + 3; }

}   // namespace

std::vector<char> constrained_dofs(const DeRhamSpaces2D& spaces, const CoarseLayout& layout)
{
    std::vector<char> mask(layout.size(), 0);
    for (int i = 0; i < spaces.dim0(); ++i) {
        mask[layout.off_w() + i] = spaces.constrained0[i];
    }
    for (int i = 0; i < spaces.dim1(); ++i) {
        mask[layout.off_u() + i] = spaces.constrained1[i];
    }
    return mask;
}

Eigen::VectorXd essential_values(const DeRhamSpaces2D& spaces, const BoundaryData& data, double t,
                                 const CoarseLayout& layout)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.size());
    const BoundarySpec& bc = spaces.bc;
    const int ng = edge_gauss(spaces);

    if (data.velocity) {
        for (Side side : all_sides) {
            if (!bc.has(bc.normal_velocity, side)) {
                continue;
            }
            const Trace tr = v1_normal_trace(spaces, side, layout.off_u());
            const SplineSpace1D& sp = *tr.space;
            const int n = sp.dim();
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
            Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
            const bool x_comp = side == Side::left || side == Side::right;
            for_edge_points(tr, ng, [&](double x, double y, double w, int e, const std::vector<double>& v) {
                const Eigen::Vector2d g = data.velocity(x, y, t);
                const double gn = x_comp ? g.x() : g.y();
                for (int a = 0; a <= sp.degree(); ++a) {
                    const int ia = sp.global_index(e, a);
                    r(ia) += w * gn * v[a];
                    for (int b = 0; b <= sp.degree(); ++b) {
                        M(ia, sp.global_index(e, b)) += w * v[a] * v[b];
                    }
                }
            });
            const Eigen::VectorXd c = M.ldlt().solve(r);
            for (int i = 0; i < n; ++i) {
                out(tr.dof[i]) = c(i);
            }
        }
    }

    if (data.vorticity && bc.vorticity != 0) {
        std::map<int, int> local;
        std::vector<Trace> traces;
        for (Side side : all_sides) {
            if (bc.has(bc.vorticity, side)) {
                traces.push_back(v0_trace(spaces, side, layout.off_w()));
                for (int d : traces.back().dof) {
                    local.emplace(d, static_cast<int>(local.size()));
                }
            }
        }
        const int n = static_cast<int>(local.size());
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        for (const Trace& tr : traces) {
            const SplineSpace1D& sp = *tr.space;
            for_edge_points(tr, ng, [&](double x, double y, double w, int e, const std::vector<double>& v) {
                const double g = data.vorticity(x, y, t);
                for (int a = 0; a <= sp.degree(); ++a) {
                    const int ia = local.at(tr.dof[sp.global_index(e, a)]);
                    r(ia) += w * g * v[a];
                    for (int b = 0; b <= sp.degree(); ++b) {
                        M(ia, local.at(tr.dof[sp.global_index(e, b)])) += w * v[a] * v[b];
                    }
                }
            });
        }
        const Eigen::VectorXd c = M.ldlt().solve(r);
        for (const auto& [d, i] : local) {
            out(d) = c(i);
        }
    }
    return out;
}

Eigen::VectorXd boundary_load(const DeRhamSpaces2D& spaces, const BoundaryData& data, double t,
                              const CoarseLayout& layout)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.size());
    const BoundarySpec& bc = spaces.bc;
    const int ng = edge_gauss(spaces);
    for (Side side : all_sides) {
        const Eigen::Vector2d n = outward_normal(side);
        if (data.pressure && bc.has(bc.pressure, side)) {
            const Trace tr = v1_normal_trace(spaces, side, layout.off_u());
            const double nc = (side == Side::left || side == Side::right) ? n.x() : n.y();
            const SplineSpace1D& sp = *tr.space;
            for_edge_points(tr, ng, [&](double x, double y, double w, int e, const std::vector<double>& v) {
                const double ph = data.pressure(x, y, t);
                for (int a = 0; a <= sp.degree(); ++a) {
                    out(tr.dof[sp.global_index(e, a)]) -= w * ph * nc * v[a];
                }
            });
        }
        if (data.velocity && bc.has(bc.tangential_velocity, side)) {
            const Trace tr = v0_trace(spaces, side, layout.off_w());
            const SplineSpace1D& sp = *tr.space;
            for_edge_points(tr, ng, [&](double x, double y, double w, int e, const std::vector<double>& v) {
                const Eigen::Vector2d g = data.velocity(x, y, t);
                const double ut = g.x() * n.y() - g.y() * n.x();
                for (int a = 0; a <= sp.degree(); ++a) {
                    out(tr.dof[sp.global_index(e, a)]) -= w * ut * v[a];
                }
            });
        }
    }
    return out;
}

Eigen::VectorXd ConstrainedSystem::expand(const Eigen::VectorXd& x_free) const
{
    Eigen::VectorXd x = fixed;
    for (std::size_t i = 0; i < free_to_full.size(); ++i) {
        x(free_to_full[i]) = x_free(static_cast<Eigen::Index>(i));
    }
    return x;
}

ConstrainedSystem apply_bc(const SparseSystem& system, const std::vector<char>& constrained, const Eigen::VectorXd& values)
{
    const int n = static_cast<int>(system.A.rows());
    if (static_cast<int>(constrained.size()) != n || values.size() != n || system.b.size() != n) {
        throw std::invalid_argument("apply_bc: constraint mask or values do not match the system size");
    }
    ConstrainedSystem cs;
    cs.fixed = Eigen::VectorXd::Zero(n);
    std::vector<int> full_to_free(n, -1);
    for (int i = 0; i < n; ++i) {
        if (constrained[i]) {
            cs.fixed(i) = values(i);
        }
        else {
            full_to_free[i] = static_cast<int>(cs.free_to_full.size());
            cs.free_to_full.push_back(i);
        }
    }
    const int nf = static_cast<int>(cs.free_to_full.size());
    Eigen::VectorXd b_full = system.b - system.A * cs.fixed;
    cs.b.resize(nf);
    for (int i = 0; i < nf; ++i) {
        cs.b(i) = b_full(cs.free_to_full[i]);
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(system.A.nonZeros());
    for (int k = 0; k < system.A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.A, k); it; ++it) {
            const int r = full_to_free[it.row()];
            const int c = full_to_free[it.col()];
            if (r >= 0 && c >= 0) {
                trip.emplace_back(r, c, it.value());
            }
        }
    }
    cs.A.resize(nf, nf);
    cs.A.setFromTriplets(trip.begin(), trip.end());
    return cs;
}

}   // namespace vmsns
