#include "vmsns/bench/errors.hpp"

#include "vmsns/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vmsns::bench {

namespace {

int points_for(const DeRhamSpaces2D& s, int n_points) { return n_points > 0 ? n_points : std::max(s.kx, s.ky) + 2; }

}   // namespace

double l2_error(const DeRhamSpaces2D& spaces, ScalarKind kind, const Eigen::VectorXd& coeffs, const ScalarField& exact,
                double t, bool subtract_mean, int n_points)
{
    const ElementTables tables(spaces, nullptr, points_for(spaces, n_points));
    double sum = 0.0;
    double sum_sq = 0.0;
    double area = 0.0;
    for (int e = 0; e < spaces.mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const auto& dofs = kind == ScalarKind::vorticity ? eb.dofs0 : eb.dofs2;
        const Eigen::MatrixXd& B = kind == ScalarKind::vorticity ? eb.n0 : eb.p;
        Eigen::VectorXd loc(dofs.size());
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            loc(static_cast<Eigen::Index>(i)) = coeffs(dofs[i]);
        }
        const Eigen::VectorXd vals = B * loc;
        for (int q = 0; q < eb.nq(); ++q) {
            const double d = vals(q) - exact(eb.x(q), eb.y(q), t);
            sum += eb.w(q) * d;
            sum_sq += eb.w(q) * d * d;
            area += eb.w(q);
        }
    }
    if (subtract_mean) {
        sum_sq -= sum * sum / area;
    }
    return std::sqrt(std::max(0.0, sum_sq));
}

double l2_error(const DeRhamSpaces2D& spaces, const Eigen::VectorXd& coeffs, const VectorField& exact, double t,
                int n_points)
{
    const ElementTables tables(spaces, nullptr, points_for(spaces, n_points));
    double sum_sq = 0.0;
    for (int e = 0; e < spaces.mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        Eigen::VectorXd loc(eb.dofs1.size());
        for (std::size_t i = 0; i < eb.dofs1.size(); ++i) {
            loc(static_cast<Eigen::Index>(i)) = coeffs(eb.dofs1[i]);
        }
        const Eigen::VectorXd vx = eb.ux * loc;
        const Eigen::VectorXd vy = eb.uy * loc;
        for (int q = 0; q < eb.nq(); ++q) {
            const Eigen::Vector2d g = exact(eb.x(q), eb.y(q), t);
            sum_sq += eb.w(q) * ((vx(q) - g.x()) * (vx(q) - g.x()) + (vy(q) - g.y()) * (vy(q) - g.y()));
        }
    }
    return std::sqrt(sum_sq);
}

FineNorms fine_norms(const Discretization& disc, const State& s)
{
    FineNorms n;
    if (s.fine.empty()) {
        return n;
    }
    const ElementTables& tables = disc.tables();
    for (int e = 0; e < disc.spaces().mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        if (!eb.has_fine || s.fine[e].size() != eb.nf()) {
            continue;
        }
        const SampledState v = sample_state(eb, s);
        const Eigen::Index m0 = eb.fine.w0.cols();
        const Eigen::Index m1 = eb.fine.u_x.cols();
        const Eigen::Index m2 = eb.fine.p.cols();
        const Eigen::VectorXd pf = eb.fine.p * s.fine[e].segment(m0 + m1, m2);
        n.w += eb.w.dot(v.wf.cwiseAbs2());
        n.u += eb.w.dot(v.ufx.cwiseAbs2() + v.ufy.cwiseAbs2());
        n.p += eb.w.dot(pf.cwiseAbs2());
    }
    n.w = std::sqrt(n.w);
    n.u = std::sqrt(n.u);
    n.p = std::sqrt(n.p);
    return n;
}

ConvergenceTable convergence_table(const std::vector<double>& h, const std::vector<double>& errors)
{
    if (h.size() != errors.size() || h.size() < 2) {
        throw std::invalid_argument("convergence_table: need at least two (h, error) pairs");
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i]) || !(h[i] > 0.0) || !std::isfinite(h[i])) {
            throw std::invalid_argument("convergence_table: errors and mesh sizes must be positive and finite");
        }
    }
    const double n = static_cast<double>(h.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    ConvergenceTable t;
    t.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    for (std::size_t i = 1; i < h.size(); ++i) {
        t.pairwise.push_back(std::log(errors[i] / errors[i - 1]) / std::log(h[i] / h[i - 1]));
    }
    return t;
}

}   // namespace vmsns::bench
