// Acceptance run: one PASS/FAIL line per criterion.
// Exit status is 0 unless --strict is given, in which case it is the number of failures.

#include "vmsns/bench/errors.hpp"
#include "vmsns/bench/exact.hpp"
#include "vmsns/bench/run_case.hpp"
#include "vmsns/bubbles.hpp"
#include "vmsns/derham.hpp"
#include "vmsns/solver.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace vmsns;
using namespace vmsns::bench;

namespace {

constexpr double two_pi = 6.28318530717958647692;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

double slope_of(const std::vector<int>& n, const std::vector<double>& e)
{
    std::vector<double> h;
    for (int m : n) {
        h.push_back(1.0 / m);
    }
    return convergence_table(h, e).slope;
}

Outcome complex_exactness()
{
    int bad = 0;
    for (int k = 1; k <= 4; ++k) {
        for (int n = 2; n <= 8; ++n) {
            for (bool periodic : {false, true}) {
                const Mesh2D m = periodic ? Mesh2D::periodic_box(1.0, n) : Mesh2D::unit_square(n);
                const DeRhamSpaces2D s =
                    build_complex(m, k, k, periodic ? BoundarySpec::none() : BoundarySpec::homogeneous_complex());
                const Eigen::SparseMatrix<double> z = div_vector_to_scalar(s) * rot_scalar_to_vector(s);
                for (int c = 0; c < z.outerSize(); ++c) {
                    for (Eigen::SparseMatrix<double>::InnerIterator it(z, c); it; ++it) {
                        bad += it.value() != 0.0;
                    }
                }
            }
        }
    }
    int bubble_bad = 0;
    for (int kp = 2; kp <= 6; ++kp) {
        const BubbleComplex b = build_bubble_complex(kp, kp);
        const int r_rot = static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(b.rot_map(1.0, 1.0)).rank());
        const int r_div = static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(b.div_map(1.0, 1.0)).rank());
        const bool ok = b.dim0() - b.dim1() + b.dim2() == 0 && r_rot == b.dim0() && r_div == b.dim2() &&
                        b.dim1() - r_div == r_rot;
        bubble_bad += !ok;
    }
    return {bad == 0 && bubble_bad == 0, "nonzero div.rot entries " + std::to_string(bad) +
                                             ", bubble identity failures " + std::to_string(bubble_bad)};
}

NSConfig cavity_config(const Discretization& d, const ExactSolution& ex, double re_inv, StabMode mode)
{
    NSConfig cfg;
    cfg.re_inv = re_inv;
    cfg.stab = mode;
    cfg.picard_max = 200;
    cfg.forcing = ex.forcing;
    cfg.boundary.spec = d.spaces().bc;
    cfg.boundary.velocity = ex.u;
    return cfg;
}

Outcome incompressibility()
{
    const double re_inv = 1e-3;
    Discretization d(Mesh2D::unit_square(16), 2, 3, BoundarySpec::velocity_dirichlet());
    const ExactSolution ex = exact_cavity_manufactured(re_inv);
    const SteadyResult r = solve_steady(d, cavity_config(d, ex, re_inv, StabMode::full_cn));
    const DivergenceReport div = divergence_report(d, r.state);
    return {div.coarse <= 1e-10 && div.fine <= 1e-10,
            "max |div u^h| " + fmt(div.coarse) + ", max |div u'| " + fmt(div.fine)};
}

Outcome condensation()
{
    const double re_inv = 1e-3;
    Discretization d(Mesh2D::unit_square(4), 2, 3, BoundarySpec::velocity_dirichlet());
    const ExactSolution ex = exact_cavity_manufactured(re_inv);
    NSConfig cfg = cavity_config(d, ex, re_inv, StabMode::full_cn);
    cfg.dt = 0.05;
    State s0 = initial_state(d, ex.u, true);
    // a nonzero previous state with nonzero fine scales
    s0 = advance_timestep(d, s0, cfg).next;
    const State a = picard_step(d, s0, s0, cfg, false, false);
    const State b = picard_step(d, s0, s0, cfg, false, true);
    double m = std::max({max_diff(a.w, b.w), max_diff(a.u, b.u), max_diff(a.p, b.p), std::abs(a.lambda - b.lambda)});
    double fine = 0.0;
    for (std::size_t e = 0; e < a.fine.size(); ++e) {
        m = std::max(m, max_diff(a.fine[e], b.fine[e]));
        fine = std::max(fine, a.fine[e].cwiseAbs().maxCoeff());
    }
    return {m <= 1e-9 && fine > 0.0, "max coefficient difference " + fmt(m) + " (fine scale size " + fmt(fine) + ")"};
}

Outcome cavity_rates()
{
    const std::vector<int> meshes{2, 4, 8, 16, 32};
    const std::vector<int> tail{4, 8, 16, 32};
    bool pass = true;
    std::ostringstream os;
    for (int k = 1; k <= 3; ++k) {
        CaseSpec spec;
        spec.name = "cavity-manufactured-steady";
        spec.meshes = meshes;
        spec.k = k;
        spec.kprime = k + 1;
        spec.re_inv = 1e-3;
        spec.picard_max = 200;
        const CaseResult stab = run_case(spec);
        spec.meshes = {meshes.back()};
        spec.stab = StabMode::none;
        const CaseResult plain = run_case(spec);

        std::vector<double> eu, ew, ep;
        for (std::size_t i = 1; i < stab.errors.size(); ++i) {
            eu.push_back(stab.errors[i].err_u);
            ew.push_back(stab.errors[i].err_w);
            ep.push_back(stab.errors[i].err_p);
        }
        const double ru = slope_of(tail, eu);
        const double rw = slope_of(tail, ew);
        const double rp = slope_of(tail, ep);
        const ErrorRow& fs = stab.errors.back();
        const ErrorRow& fp = plain.errors.back();
        const auto gap = [](double a, double b) { return std::abs(a - b) / b; };
        const double gu = gap(fs.err_u, fp.err_u);
        const double gp = gap(fs.err_p, fp.err_p);
        const double gw = gap(fs.err_w, fp.err_w);
        const bool ok = std::abs(ru - k) <= 0.25 && std::abs(rp - k) <= 0.25 && std::abs(rw - (k + 1)) <= 0.25 &&
                        std::max({gu, gp, gw}) <= 0.05;
        pass = pass && ok;
        os << (k > 1 ? "; " : "") << "k=" << k << " rates u " << fmt(ru) << " p " << fmt(rp) << " w " << fmt(rw)
           << ", stab/unstab gap u " << fmt(gu) << " p " << fmt(gp) << " w " << fmt(gw) << (ok ? "" : " [out of range]");
    }
    return {pass, os.str()};
}

Outcome taylor_green()
{
    const double caption[3] = {0.99, 2.09, 3.17};
    bool pass = true;
    std::ostringstream os;
    for (int k = 1; k <= 3; ++k) {
        CaseSpec spec;
        spec.name = "taylor-green";
        spec.meshes = {4, 8, 16};
        spec.k = k;
        spec.kprime = k + 1;
        spec.re_inv = 0.01;
        spec.t_final = 1.0;
        const CaseResult stab = run_case(spec);
        spec.stab = StabMode::none;
        const CaseResult plain = run_case(spec);

        std::vector<double> eu;
        double fine = 0.0;
        double rel = 0.0;
        for (std::size_t i = 0; i < stab.errors.size(); ++i) {
            eu.push_back(stab.errors[i].err_u);
            fine = std::max({fine, stab.errors[i].norm_u_fine, stab.errors[i].norm_w_fine});
            rel = std::max(rel, std::abs(stab.errors[i].err_u - plain.errors[i].err_u) / plain.errors[i].err_u);
        }
        const double r = slope_of(spec.meshes, eu);
        const bool ok = std::abs(r - caption[k - 1]) <= 0.3 && fine <= 1e-10 && rel <= 1e-9;
        pass = pass && ok;
        os << (k > 1 ? "; " : "") << "k=" << k << " rate " << fmt(r) << ", fine " << fmt(fine) << ", stab/unstab "
           << fmt(rel) << (ok ? "" : " [out of range]");
    }
    return {pass, os.str()};
}

Outcome energy_ledger()
{
    Discretization d(Mesh2D::periodic_box(two_pi, 8), 2, 3, BoundarySpec::none());
    const int steps = 200;
    bool pass = true;
    double worst_res = 0.0;
    double worst_rise = 0.0;
    double worst_none = 0.0;
    for (StabMode mode : {StabMode::full_cn, StabMode::none}) {
        NSConfig cfg;
        cfg.re_inv = 0.0;
        cfg.dt = 0.001;
        cfg.t_final = steps * cfg.dt;
        cfg.stab = mode;
        State s = initial_state(d, initial_shear_layer(), mode != StabMode::none);
        for (int i = 0; i < steps; ++i) {
            const StepResult st = advance_timestep(d, s, cfg);
            const double k0 = kinetic_energy(d, s).total;
            const double k1 = kinetic_energy(d, st.next).total;
            if (mode == StabMode::none) {
                worst_none = std::max(worst_none, std::abs(k1 - k0) / k0);
            }
            else {
                const EnergyLedger led = energy_report(d, s, st.next, st, cfg);
                worst_res = std::max(worst_res, std::abs(led.residual) / std::max(1.0, k1 / cfg.dt));
                worst_rise = std::max(worst_rise, (k1 - k0) / k0);
            }
            s = st.next;
        }
    }
    pass = worst_res <= 1e-8 && worst_rise <= 1e-14 && worst_none <= 1e-10;
    return {pass, "ledger residual/max(1,K/dt) " + fmt(worst_res) + ", largest relative K rise " + fmt(worst_rise) +
                      ", unstabilized drift " + fmt(worst_none)};
}

Outcome oseen()
{
    const double sigma = 1.0;
    const std::vector<int> meshes{4, 8, 16, 32};
    const double sup = oseen_beta_unit_sup();
    bool pass = true;
    std::ostringstream os;
    for (double nu : {1.0, 1e-3}) {
        // scaled for the beta-nu-sigma and beta-h-nu conditions on the coarsest mesh
        const double h0 = 1.0 / meshes.front();
        const double s = 0.9 * std::min(std::sqrt(nu * sigma / 6.0) / sup, nu / (24.0 * h0 * sup));
        const VectorField beta = oseen_beta(s);
        for (int k = 1; k <= 3; ++k) {
            std::vector<double> eu, ew, ep;
            double cons = 0.0;
            AssumptionReport first;
            for (std::size_t i = 0; i < meshes.size(); ++i) {
                Discretization d(Mesh2D::unit_square(meshes[i]), k, k + 1, BoundarySpec::velocity_dirichlet());
                OseenParams op;
                op.sigma = sigma;
                op.nu = nu;
                op.beta_h = project_v1(d, beta);
                // the forcing uses the discrete field so the problem stays consistent for every k
                const std::vector<double> bc(op.beta_h.data(), op.beta_h.data() + op.beta_h.size());
                const VectorField beta_h = [&d, bc](double x, double y, double) { return d.spaces().velocity(bc, x, y); };
                const ExactSolution ex = exact_oseen(nu, sigma, beta_h);
                op.forcing = ex.forcing;
                const State st = solve_oseen(d, op);
                eu.push_back(l2_error(d.spaces(), st.u, ex.u, 0.0));
                ew.push_back(l2_error(d.spaces(), ScalarKind::vorticity, st.w, ex.w, 0.0));
                ep.push_back(l2_error(d.spaces(), ScalarKind::pressure, st.p, ex.p, 0.0, true));
                cons = std::max(cons, oseen_consistency_residual(d, op, ExactFields{ex.u, ex.w, ex.p, ex.rot_w}));
                if (i == 0) {
                    first = check_assumptions(d, op);
                }
            }
            const double ru = slope_of(meshes, eu);
            const double rw = slope_of(meshes, ew);
            const double rp = slope_of(meshes, ep);
            const bool ok = std::abs(ru - k) <= 0.3 && std::abs(rp - k) <= 0.3 && std::abs(rw - (k + 1)) <= 0.3 &&
                            cons <= 1e-10 && first.satisfied[0] && first.satisfied[2];
            pass = pass && ok;
            os << (os.tellp() > 0 ? "; " : "") << "nu=" << fmt(nu) << " k=" << k << " rates u " << fmt(ru) << " p "
               << fmt(rp) << " w " << fmt(rw) << ", consistency " << fmt(cons) << ", margins " << fmt(first.margin[0])
               << "/" << fmt(first.margin[1]) << "/" << fmt(first.margin[2]) << "/" << fmt(first.margin[3])
               << (ok ? "" : " [out of range]");
        }
    }
    return {pass, os.str()};
}

Outcome full_vs_semi()
{
    Discretization d(Mesh2D::periodic_box(two_pi, 8), 3, 4, BoundarySpec::none());
    const double dt = 0.01;
    const int steps = 200;
    const int every = 10;
    std::vector<double> k_full, k_semi;
    for (StabMode mode : {StabMode::full_cn, StabMode::semi_cn}) {
        NSConfig cfg;
        cfg.re_inv = 1.0 / 1600.0;
        cfg.dt = dt;
        cfg.t_final = steps * dt;
        cfg.stab = mode;
        State s = initial_state(d, initial_shear_layer(), true);
        std::vector<double>& out = mode == StabMode::full_cn ? k_full : k_semi;
        for (int i = 1; i <= steps; ++i) {
            s = advance_timestep(d, s, cfg).next;
            if (i % every == 0) {
                out.push_back(kinetic_energy(d, s).total);
            }
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < k_full.size(); ++i) {
        worst = std::max(worst, std::abs(k_full[i] - k_semi[i]) / k_full[i]);
    }
    return {worst <= 1e-3, "largest relative kinetic energy difference " + fmt(worst) + " over " +
                               std::to_string(k_full.size()) + " output times"};
}

}   // namespace

int main(int argc, char** argv)
{
    bool strict = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0) {
            strict = true;
        }
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"complex exactness", complex_exactness},
        {"pointwise incompressibility", incompressibility},
        {"condensation equivalence", condensation},
        {"manufactured cavity rates", cavity_rates},
        {"Taylor-Green", taylor_green},
        {"energy ledger", energy_ledger},
        {"Oseen validation", oseen},
        {"full-CN vs semi-CN", full_vs_semi},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        }
        catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " (" << fmt(secs) << " s)" << std::endl;
    }
    std::cout << (8 - failed) << "/8 criteria passed" << std::endl;
    return strict ? failed : 0;
}
