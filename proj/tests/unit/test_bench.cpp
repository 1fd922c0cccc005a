#include "vmsns/bench/errors.hpp"
#include "vmsns/bench/exact.hpp"
#include "vmsns/bench/output.hpp"
#include "vmsns/bench/run_case.hpp"
#include "vmsns/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace vmsns;
using namespace vmsns::bench;

namespace {

constexpr double pi = 3.14159265358979323846;

std::vector<Point2> sample_points(int n, double len)
{
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
        pts.push_back({len * (0.013 + 0.97 * std::fmod(0.618034 * i, 1.0)), len * (0.02 + 0.96 * i / (n - 1.0))});
    }
    return pts;
}

}   // namespace

TEST_CASE("manufactured cavity fields")
{
    const ExactSolution ex = exact_cavity_manufactured(1e-3);
    CHECK(ex.u(0.5, 1.0, 0.0).x() == doctest::Approx(0.125).epsilon(1e-15));
    for (double x : {0.0, 0.3, 0.77, 1.0}) {
        CHECK(ex.u(x, 0.0, 0.0).x() == 0.0);
    }
    const double e = 1e-5;
    for (const Point2 p : sample_points(100, 1.0)) {
        const double div = (ex.u(p.x + e, p.y, 0).x() - ex.u(p.x - e, p.y, 0).x() + ex.u(p.x, p.y + e, 0).y() -
                            ex.u(p.x, p.y - e, 0).y()) /
                           (2 * e);
        CHECK(std::abs(div) <= 1e-9);
    }
    CHECK(cavity_pressure_mean() == doctest::Approx(std::pow(1.0 - std::cos(1.0), 2)).epsilon(1e-14));
}

TEST_CASE("manufactured forcing matches the strong operator")
{
    for (double re_inv : {1.0, 1e-3}) {
        const ExactSolution ex = exact_cavity_manufactured(re_inv);
        const double e = 1e-5;
        for (const Point2 p : sample_points(100, 1.0)) {
            const double x = p.x;
            const double y = p.y;
            auto u = [&](double a, double b) { return ex.u(a, b, 0.0); };
            const double w = (u(x + e, y).y() - u(x - e, y).y() - u(x, y + e).x() + u(x, y - e).x()) / (2 * e);
            CHECK(std::abs(w - ex.w(x, y, 0.0)) <= 1e-8);
            const double wy = (ex.w(x, y + e, 0.0) - ex.w(x, y - e, 0.0)) / (2 * e);
            const double wx = (ex.w(x + e, y, 0.0) - ex.w(x - e, y, 0.0)) / (2 * e);
            const double px = (ex.p(x + e, y, 0.0) - ex.p(x - e, y, 0.0)) / (2 * e);
            const double py = (ex.p(x, y + e, 0.0) - ex.p(x, y - e, 0.0)) / (2 * e);
            const Eigen::Vector2d uu = u(x, y);
            const Eigen::Vector2d f(w * -uu.y() + re_inv * wy + px, w * uu.x() - re_inv * wx + py);
            CHECK((f - ex.forcing(x, y, 0.0)).norm() <= 1e-6);
        }
    }
}

TEST_CASE("Taylor-Green fields")
{
    const double re_inv = 0.01;
    const ExactSolution ex = exact_taylor_green(re_inv);
    CHECK(ex.w(pi / 2, pi / 2, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    for (double s : {0.0, 1.1, 3.0, 5.9}) {
        CHECK((ex.u(0.0, s, 0.3) - ex.u(2 * pi, s, 0.3)).norm() <= 1e-14);
        CHECK((ex.u(s, 0.0, 0.3) - ex.u(s, 2 * pi, 0.3)).norm() <= 1e-14);
    }
    // kinetic energy by tensor Gauss quadrature
    const QuadratureRule r = gauss_legendre(10);
    const int n = 8;
    const double h = 2 * pi / n;
    auto energy = [&](double t) {
        double k = 0.0;
        for (int ey = 0; ey < n; ++ey) {
            for (int ex_ = 0; ex_ < n; ++ex_) {
                for (int j = 0; j < r.size(); ++j) {
                    for (int i = 0; i < r.size(); ++i) {
                        const Eigen::Vector2d u = ex.u((ex_ + r.points[i]) * h, (ey + r.points[j]) * h, t);
                        k += 0.5 * r.weights[i] * r.weights[j] * h * h * u.squaredNorm();
                    }
                }
            }
        }
        return k;
    };
    CHECK(energy(0.0) == doctest::Approx(pi * pi).epsilon(1e-12));
    CHECK(energy(0.5) == doctest::Approx(pi * pi * std::exp(-4 * 0.5 * re_inv)).epsilon(1e-12));

    Discretization d(Mesh2D::periodic_box(2 * pi, 8), 3, 0, BoundarySpec::none());
    const State s = initial_state(d, ex.u, false);
    CHECK(kinetic_energy(d, s).total == doctest::Approx(pi * pi).epsilon(1e-3));
}

TEST_CASE("shear layer initial data")
{
    const VectorField u = initial_shear_layer();
    CHECK(std::abs(u(1.0, pi / 2, 0.0).x()) <= 1e-15);
    CHECK(u(pi / 2, 2.0, 0.0).y() == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(u(0.3, pi, 0.0).x() == doctest::Approx(std::tanh((pi / 2) / (pi / 15))).epsilon(1e-14));

    Discretization d(Mesh2D::periodic_box(2 * pi, 4), 2, 3, BoundarySpec::none());
    const State s = initial_state(d, u, true);
    CHECK(divergence_report(d, s).coarse <= 1e-10);

    // int tanh^2 = y - delta tanh
    const double delta = pi / 15;
    const double closed = pi * (2 * pi - 4 * delta * std::tanh(pi / (2 * delta)) + 0.05 * 0.05 * pi);
    CHECK(shear_layer_energy() == doctest::Approx(closed).epsilon(1e-13));
}

TEST_CASE("lid and Oseen advecting fields")
{
    const VectorField lid = lid_velocity();
    CHECK(lid(0.5, 1.0, 0.0).x() == 1.0);
    CHECK(lid(0.5, 0.5, 0.0).norm() == 0.0);

    const VectorField beta = oseen_beta(2.0);
    const double e = 1e-6;
    for (const Point2 p : sample_points(20, 1.0)) {
        const double div = (beta(p.x + e, p.y, 0).x() - beta(p.x - e, p.y, 0).x() + beta(p.x, p.y + e, 0).y() -
                            beta(p.x, p.y - e, 0).y()) /
                           (2 * e);
        CHECK(std::abs(div) <= 1e-8);
    }
    for (double t : {0.0, 0.4, 1.0}) {
        CHECK(std::abs(beta(0.0, t, 0).x()) <= 1e-15);
        CHECK(std::abs(beta(t, 1.0, 0).y()) <= 1e-15);
    }
    CHECK(oseen_beta_unit_sup() > 0.0);
}

TEST_CASE("L2 errors")
{
    const DeRhamSpaces2D s = build_complex(Mesh2D::unit_square(3), 2, 2, BoundarySpec::velocity_dirichlet());
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(s.dim2());
    const ScalarField one = [](double, double, double) { return 1.0; };
    CHECK(l2_error(s, ScalarKind::pressure, zero2, one, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(l2_error(s, ScalarKind::pressure, zero2, one, 0.0, true) <= 1e-14);

    const Eigen::VectorXd ones0 = Eigen::VectorXd::Constant(s.dim0(), 3.0);
    const ScalarField three = [](double, double, double) { return 3.0; };
    CHECK(l2_error(s, ScalarKind::vorticity, ones0, three, 0.0) <= 1e-13);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(s.dim1());
    u.head(s.dim1x()).setConstant(1.0);
    CHECK(l2_error(s, u, [](double, double, double) { return Eigen::Vector2d(1.0, 0.0); }, 0.0) <= 1e-13);

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd w(s.dim0());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = d(rng);
    }
    const ScalarField ex = [](double x, double y, double) { return std::sin(3 * x) * std::cos(2 * y); };
    const double gauss = l2_error(s, ScalarKind::vorticity, w, ex, 0.0, false, 8);

    const int m = 1001;
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            pts.push_back({i / (m - 1.0), j / (m - 1.0)});
        }
    }
    const std::vector<double> c(w.data(), w.data() + w.size());
    const std::vector<double> v = eval_field(s.v0, c, pts);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const double wt = (i == 0 || i == m - 1 ? 0.5 : 1.0) * (j == 0 || j == m - 1 ? 0.5 : 1.0);
            const Point2 p = pts[static_cast<std::size_t>(j) * m + i];
            const double diff = v[static_cast<std::size_t>(j) * m + i] - ex(p.x, p.y, 0.0);
            sum += wt * diff * diff;
        }
    }
    const double trap = std::sqrt(sum / ((m - 1.0) * (m - 1.0)));
    CHECK(std::abs(gauss - trap) <= 1e-6);
}

TEST_CASE("convergence tables")
{
    const std::vector<double> h{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> e2, e15;
    for (double x : h) {
        e2.push_back(x * x);
        e15.push_back(3.0 * std::pow(x, 1.5));
    }
    CHECK(convergence_table(h, e2).slope == doctest::Approx(2.0).epsilon(1e-12));
    const ConvergenceTable t = convergence_table(h, e15);
    CHECK(t.slope == doctest::Approx(1.5).epsilon(1e-12));
    REQUIRE(t.pairwise.size() == 3);
    CHECK(t.pairwise[1] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(convergence_table({0.5}, {0.1}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_table({0.5, 0.25}, {0.1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_table({0.5, 0.25}, {0.1, std::nan("")}), std::invalid_argument);
}

TEST_CASE("output formats")
{
    CHECK(format_re(0.0) == "inf");
    CHECK(format_re(1e-3) == "1000");

    std::ostringstream er;
    ErrorRow row;
    row.case_name = "taylor-green";
    row.nx = row.ny = 4;
    row.k = 1;
    row.kprime = 2;
    row.re_inv = 0.01;
    write_errors_csv(er, {row});
    std::istringstream in(er.str());
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    CHECK(header == "case,nx,ny,k,kprime,re,dt,err_w,err_u,err_p,norm_w_fine,norm_u_fine,norm_p_fine");
    CHECK(line.rfind("taylor-green,4,4,1,2,100,", 0) == 0);

    std::ostringstream en;
    write_energy_csv(en, {EnergyRow{0.5, 1.0, 0.0, 1.0, 0.0}});
    CHECK(en.str().rfind("t,K_coarse,K_fine,K_total,energy_residual\n", 0) == 0);

    Discretization d(Mesh2D::periodic_box(2 * pi, 2), 1, 0, BoundarySpec::none());
    const State s = initial_state(d, exact_taylor_green(0.01).u, false);
    const SampledGrid g = sample_grid(d, s, 5);
    CHECK(g.w.size() == 25);
    std::ostringstream vtk;
    write_fields_vtk(vtk, g, "test");
    const std::string v = vtk.str();
    CHECK(v.rfind("# vtk DataFile Version", 0) == 0);
    CHECK(v.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(v.find("DIMENSIONS 5 5 1") != std::string::npos);
    CHECK(v.find("SCALARS omega double") != std::string::npos);
    CHECK(v.find("SCALARS velocity_magnitude double") != std::string::npos);
    CHECK(v.find("SCALARS pressure double") != std::string::npos);
}

TEST_CASE("case validation and a small run")
{
    CaseSpec bad;
    bad.name = "karman";
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CaseSpec nofine;
    nofine.name = "taylor-green";
    nofine.kprime = 0;
    CHECK_THROWS_AS(validate(nofine), std::invalid_argument);

    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "vmsns_bench_test";
    std::filesystem::remove_all(dir);
    CaseSpec spec;
    spec.name = "taylor-green";
    spec.meshes = {2, 4};
    spec.k = 1;
    spec.kprime = 2;
    spec.re_inv = 0.01;
    spec.t_final = 0.25;
    spec.dt = 0.05;
    spec.sample = 8;
    spec.out_dir = dir.string();
    const CaseResult r = run_case(spec);
    REQUIRE(r.errors.size() == 2);
    CHECK(r.errors[1].err_u < r.errors[0].err_u);
    CHECK(r.errors[1].norm_u_fine <= 1e-12);
    CHECK(r.energy.size() == 6);
    CHECK(std::filesystem::exists(dir / "errors.csv"));
    CHECK(std::filesystem::exists(dir / "energy.csv"));
    CHECK(std::filesystem::exists(dir / "fields_t0.2500.vtk"));
    std::filesystem::remove_all(dir);
}
