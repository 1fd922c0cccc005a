#include "vmsns/assembly.hpp"
#include "vmsns/boundary.hpp"
#include "vmsns/quadrature.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

using namespace vmsns;

namespace {

struct Setup {
    DeRhamSpaces2D spaces;
    ElementTables tables;

    Setup(const Mesh2D& m, int k, const BoundarySpec& bc)
        : spaces(build_complex(m, k, k, bc)), tables(spaces, nullptr, default_quadrature_points(k, k, 0, 0))
    {
    }
};

/// Integral of each V0 basis function along y = yc (top edge), by 1D Gauss quadrature.
Eigen::VectorXd edge_integrals_v0(const DeRhamSpaces2D& s, double yc)
{
    const QuadratureRule r = gauss_legendre(8);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(s.dim0());
    std::vector<double> c(s.dim0(), 0.0);
    for (int i = 0; i < s.dim0(); ++i) {
        c[i] = 1.0;
        for (int e = 0; e < s.mesh.nx; ++e) {
            for (int q = 0; q < r.size(); ++q) {
                const double x = (e + r.points[q]) * s.mesh.hx();
                out(i) += r.weights[q] * s.mesh.hx() * s.v0.eval(c, x, yc);
            }
        }
        c[i] = 0.0;
    }
    return out;
}

}   // namespace

TEST_CASE("V2 mass of the constant gives the area")
{
    for (int k = 1; k <= 3; ++k) {
        const Setup a(Mesh2D::unit_square(3), k, BoundarySpec::velocity_dirichlet());
        const Eigen::SparseMatrix<double> M = assemble_form(FormId::mass2, a.tables);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(a.spaces.dim2());
        CHECK(std::abs(one.dot(M * one) - 1.0) <= 1e-12);
        CHECK(std::abs(pressure_integrals(a.tables).sum() - 1.0) <= 1e-12);

        const Setup b(Mesh2D::periodic_box(2.0, 3), k, BoundarySpec::none());
        const Eigen::SparseMatrix<double> Mb = assemble_form(FormId::mass2, b.tables);
        const Eigen::VectorXd oneb = Eigen::VectorXd::Ones(b.spaces.dim2());
        CHECK(std::abs(oneb.dot(Mb * oneb) - 4.0) <= 1e-12);
    }
}

TEST_CASE("pressure coupling vanishes on rot fields")
{
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const Setup a(Mesh2D::unit_square(4), 2, BoundarySpec::velocity_dirichlet());
    const Eigen::SparseMatrix<double> B = assemble_form(FormId::pressure_div, a.tables);
    Eigen::VectorXd psi(a.spaces.dim0());
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        psi(i) = d(rng);
    }
    const Eigen::VectorXd v = a.spaces.rot * psi;
    CHECK((B.transpose() * v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("convection of constant fields on a periodic mesh")
{
    const Setup a(Mesh2D::periodic_box(1.0, 4), 2, BoundarySpec::none());
    const Eigen::SparseMatrix<double> C =
        assemble_form(FormId::convection, a.tables, [](double, double) { return Eigen::Vector2d(1.0, 0.0); });
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(a.spaces.dim0());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(a.spaces.dim1());
    v.tail(a.spaces.dim1() - a.spaces.dim1x()).setOnes();
    CHECK(std::abs(v.dot(C * w) - 1.0) <= 1e-12);
    CHECK_THROWS_AS(assemble_form(FormId::convection, a.tables), std::invalid_argument);
}

TEST_CASE("rot coupling equals the V1 mass times the rot map")
{
    for (int k = 1; k <= 3; ++k) {
        const Setup a(Mesh2D::unit_square(3), k, BoundarySpec::velocity_dirichlet());
        const Eigen::MatrixXd G = Eigen::MatrixXd(assemble_form(FormId::rot_coupling, a.tables));
        const Eigen::MatrixXd M1R =
            Eigen::MatrixXd(assemble_form(FormId::mass1, a.tables)) * Eigen::MatrixXd(a.spaces.rot);
        CHECK((G - M1R).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("condensation of a hand-computed block")
{
    ElementFineBlock blk;
    blk.element = 3;
    blk.kff = Eigen::Vector2d(2.0, 4.0).asDiagonal();
    blk.kcf = Eigen::Matrix2d::Identity();
    blk.kfc = Eigen::Matrix2d::Identity();
    blk.bf = Eigen::Vector2d(2.0, 4.0);
    const CondensedElement c = condense_element(blk);
    CHECK((c.schur - Eigen::Matrix2d(Eigen::Vector2d(-0.5, -0.25).asDiagonal())).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((c.rhs - Eigen::Vector2d(-1.0, -1.0)).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::VectorXd f = c.recover(Eigen::Vector2d(2.0, 0.0));
    CHECK((f - Eigen::Vector2d(0.0, 1.0)).cwiseAbs().maxCoeff() <= 1e-15);

    ElementFineBlock zero = blk;
    zero.kcf.setZero();
    zero.kfc.setZero();
    const CondensedElement z = condense_element(zero);
    CHECK(z.schur.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.rhs.cwiseAbs().maxCoeff() == 0.0);

    ElementFineBlock sing = blk;
    sing.kff(1, 1) = 0.0;
    try {
        condense_element(sing);
        FAIL("expected a singular element error");
    }
    catch (const SingularElementError& e) {
        CHECK(e.element() == 3);
    }
}

TEST_CASE("global assembly does not depend on element order")
{
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const Setup a(Mesh2D::unit_square(4), 2, BoundarySpec::velocity_dirichlet());
    const CoarseLayout L = coarse_layout(a.spaces);
    const int ne = a.spaces.mesh.n_elements();
    std::vector<std::vector<int>> dofs(ne);
    std::vector<Eigen::MatrixXd> blocks(ne);
    std::vector<Eigen::VectorXd> rhs(ne);
    for (int e = 0; e < ne; ++e) {
        dofs[e] = element_coarse_dofs(a.tables.basis(e), L);
        const int m = static_cast<int>(dofs[e].size());
        blocks[e] = Eigen::MatrixXd::NullaryExpr(m, m, [&]() { return d(rng); });
        rhs[e] = Eigen::VectorXd::NullaryExpr(m, [&]() { return d(rng); });
    }
    const SparseSystem s1 = scatter(L, L.size(), dofs, blocks, rhs);

    std::vector<int> perm(ne);
    for (int e = 0; e < ne; ++e) {
        perm[e] = ne - 1 - e;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<int>> dofs2;
    std::vector<Eigen::MatrixXd> blocks2;
    std::vector<Eigen::VectorXd> rhs2;
    for (int e : perm) {
        dofs2.push_back(dofs[e]);
        blocks2.push_back(blocks[e]);
        rhs2.push_back(rhs[e]);
    }
    const SparseSystem s2 = scatter(L, L.size(), dofs2, blocks2, rhs2);
    CHECK((Eigen::MatrixXd(s1.A) - Eigen::MatrixXd(s2.A)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((s1.b - s2.b).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("homogeneous constraints leave the free right-hand side alone")
{
    const Setup a(Mesh2D::unit_square(3), 2, BoundarySpec::homogeneous_complex());
    const CoarseLayout L = coarse_layout(a.spaces);
    const std::vector<char> mask = constrained_dofs(a.spaces, L);
    const int n = L.size();
    SparseSystem sys;
    sys.layout = L;
    sys.A.resize(n, n);
    sys.A.setIdentity();
    sys.b = Eigen::VectorXd::LinSpaced(n, 1.0, n);
    const ConstrainedSystem cs = apply_bc(sys, mask, Eigen::VectorXd::Zero(n));
    const int n_fixed = static_cast<int>(std::count(mask.begin(), mask.end(), 1));
    CHECK(n_fixed > 0);
    CHECK(static_cast<int>(cs.free_to_full.size()) == n - n_fixed);
    for (std::size_t i = 0; i < cs.free_to_full.size(); ++i) {
        CHECK(cs.b(static_cast<Eigen::Index>(i)) == sys.b(cs.free_to_full[i]));
    }
    CHECK_THROWS_AS(apply_bc(sys, std::vector<char>(n - 1, 0), Eigen::VectorXd::Zero(n)), std::invalid_argument);
}

TEST_CASE("lid velocity loads the vorticity block")
{
    const Setup a(Mesh2D::unit_square(4), 2, BoundarySpec::velocity_dirichlet());
    const CoarseLayout L = coarse_layout(a.spaces);
    BoundaryData data;
    data.spec = a.spaces.bc;
    data.velocity = [](double, double y, double) {
        return Eigen::Vector2d(y >= 1.0 - 1e-12 ? 1.0 : 0.0, 0.0);
    };
    const Eigen::VectorXd load = boundary_load(a.spaces, data, 0.0, L);
    const Eigen::VectorXd oracle = -edge_integrals_v0(a.spaces, 1.0);
    CHECK((load.segment(L.off_w(), L.n0) - oracle).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(load.segment(L.off_u(), L.n1 + L.n2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("outflow pressure loads the momentum block")
{
    BoundarySpec bc;
    bc.pressure = side_bit(Side::right);
    bc.normal_velocity = side_bit(Side::left) | side_bit(Side::bottom) | side_bit(Side::top);
    bc.tangential_velocity = 0xF;
    const Setup a(Mesh2D::unit_square(3), 2, bc);
    const CoarseLayout L = coarse_layout(a.spaces);
    BoundaryData data;
    data.spec = bc;
    data.pressure = [](double, double, double) { return 2.0; };
    data.velocity = [](double, double, double) { return Eigen::Vector2d(0.0, 0.0); };
    const Eigen::VectorXd load = boundary_load(a.spaces, data, 0.0, L);

    const QuadratureRule r = gauss_legendre(8);
    std::vector<double> c(a.spaces.dim1(), 0.0);
    double worst = 0.0;
    for (int i = 0; i < a.spaces.dim1(); ++i) {
        c[i] = 1.0;
        double flux = 0.0;
        for (int e = 0; e < a.spaces.mesh.ny; ++e) {
            for (int q = 0; q < r.size(); ++q) {
                const double y = (e + r.points[q]) * a.spaces.mesh.hy();
                flux += r.weights[q] * a.spaces.mesh.hy() * a.spaces.velocity(c, 1.0, y).x();
            }
        }
        worst = std::max(worst, std::abs(load(L.off_u() + i) + 2.0 * flux));
        c[i] = 0.0;
    }
    CHECK(worst <= 1e-13);
    CHECK(load.segment(L.off_w(), L.n0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parallel element loop visits every element once")
{
    std::vector<int> hits(37, 0);
    parallel_for_elements(37, [&](int e) { hits[e] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
