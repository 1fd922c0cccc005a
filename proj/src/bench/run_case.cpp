#include "vmsns/bench/run_case.hpp"

#include "vmsns/bench/errors.hpp"
#include "vmsns/bench/exact.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace vmsns::bench {

namespace {

constexpr double two_pi = 6.28318530717958647692;
const double nan = std::numeric_limits<double>::quiet_NaN();

bool periodic_case(const std::string& n) { return n == "taylor-green" || n == "shear-layer"; }
bool transient_case(const std::string& n) { return periodic_case(n); }

std::string time_tag(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", t);
    return buf;
}

void write_fields(const CaseSpec& spec, const Discretization& d, const State& s, const std::string& stem)
{
    if (spec.out_dir.empty()) {
        return;
    }
    const SampledGrid g = sample_grid(d, s, spec.sample);
    const std::filesystem::path dir(spec.out_dir);
    std::ofstream csv(dir / (stem + ".csv"));
    write_fields_csv(csv, g);
    std::ofstream vtk(dir / (stem + ".vtk"));
    write_fields_vtk(vtk, g, spec.name + " t=" + time_tag(s.t));
}

EnergyRow energy_row(const Discretization& d, const State& s, double residual)
{
    const KineticEnergy k = kinetic_energy(d, s);
    return {s.t, k.coarse, k.fine, k.total, residual};
}

}   // namespace

void validate(const CaseSpec& spec)
{
    const std::string& n = spec.name;
    if (n != "cavity-manufactured-steady" && n != "taylor-green" && n != "shear-layer" && n != "lid-driven-cavity") {
        throw std::invalid_argument("unknown case '" + n + "'");
    }
    if (spec.meshes.empty()) {
        throw std::invalid_argument(n + ": no mesh sizes given");
    }
    for (int m : spec.meshes) {
        if (m < 1) {
            throw std::invalid_argument(n + ": mesh sizes must be positive");
        }
    }
    if (spec.k < 1) {
        throw std::invalid_argument(n + ": degree must be at least 1");
    }
    if (spec.stab != StabMode::none && spec.kprime < 2) {
        throw std::invalid_argument(n + ": stabilized runs need a fine degree of at least 2");
    }
    if (spec.re_inv < 0.0 || spec.dt < 0.0) {
        throw std::invalid_argument(n + ": Re and dt must be positive");
    }
    if (transient_case(n) && !(spec.t_final > 0.0)) {
        throw std::invalid_argument(n + ": final time must be positive");
    }
    if (n == "taylor-green" && spec.re_inv == 0.0) {
        throw std::invalid_argument(n + ": needs a finite Reynolds number");
    }
    if (spec.sample < 2) {
        throw std::invalid_argument(n + ": sample grid needs at least 2 points per direction");
    }
}

CaseResult run_case(const CaseSpec& spec)
{
    validate(spec);
    if (!spec.out_dir.empty()) {
        std::filesystem::create_directories(spec.out_dir);
    }
    CaseResult result;
    const bool periodic = periodic_case(spec.name);
    const int kf = spec.kprime >= 2 ? spec.kprime : 0;

    for (std::size_t mi = 0; mi < spec.meshes.size(); ++mi) {
        const int n = spec.meshes[mi];
        const bool last = mi + 1 == spec.meshes.size();
        try {
            const Mesh2D mesh = periodic ? Mesh2D::periodic_box(two_pi, n) : Mesh2D::unit_square(n);
            const BoundarySpec bc = periodic ? BoundarySpec::none() : BoundarySpec::velocity_dirichlet();
            Discretization d(mesh, spec.k, kf, bc);

            NSConfig cfg;
            cfg.re_inv = spec.re_inv;
            cfg.picard_tol = spec.picard_tol;
            cfg.picard_max = spec.picard_max;
            cfg.stab = spec.stab;
            cfg.t_final = spec.t_final;
            cfg.boundary.spec = bc;

            ErrorRow row;
            row.case_name = spec.name;
            row.nx = row.ny = n;
            row.k = spec.k;
            row.kprime = spec.stab == StabMode::none ? 0 : spec.kprime;
            row.re_inv = spec.re_inv;
            row.err_w = row.err_u = row.err_p = nan;

            State s;
            if (spec.name == "cavity-manufactured-steady") {
                const ExactSolution ex = exact_cavity_manufactured(spec.re_inv);
                cfg.forcing = ex.forcing;
                cfg.boundary.velocity = ex.u;
                const SteadyResult r = solve_steady(d, cfg);
                s = r.state;
                result.picard_iterations += r.iterations;
                row.err_u = l2_error(d.spaces(), s.u, ex.u, 0.0);
                row.err_w = l2_error(d.spaces(), ScalarKind::vorticity, s.w, ex.w, 0.0);
                row.err_p = l2_error(d.spaces(), ScalarKind::pressure, s.p, ex.p, 0.0, true);
            }
            else if (spec.name == "lid-driven-cavity") {
                cfg.boundary.velocity = lid_velocity();
                try {
                    const SteadyResult r = solve_steady(d, cfg);
                    s = r.state;
                    result.picard_iterations += r.iterations;
                }
                catch (const PicardError&) {
                    // pseudo-time continuation towards the steady state
                    cfg.dt = spec.dt > 0.0 ? spec.dt : 0.05;
                    s = d.zero_state(spec.stab != StabMode::none);
                    bool steady = false;
                    for (int step = 0; step < spec.max_steps && !steady; ++step) {
                        const StepResult st = advance_timestep(d, s, cfg);
                        result.picard_iterations += st.iterations;
                        const double change = relative_update(d, st.next, s);
                        s = st.next;
                        steady = change <= spec.steady_tol;
                    }
                    const SteadyResult r = solve_steady(d, cfg, &s);
                    s = r.state;
                    result.picard_iterations += r.iterations;
                }
                row.dt = cfg.dt;
            }
            else {
                const double h = mesh.h();
                cfg.dt = spec.dt > 0.0 ? spec.dt : auto_time_step(h, spec.k, spec.re_inv, spec.t_final);
                row.dt = cfg.dt;
                const bool tg = spec.name == "taylor-green";
                const ExactSolution ex = exact_taylor_green(spec.re_inv);
                const VectorField u0 = tg ? ex.u : initial_shear_layer();
                s = initial_state(d, u0, spec.stab != StabMode::none);
                if (last) {
                    result.energy.push_back(energy_row(d, s, 0.0));
                }
                const long steps = std::lround(std::ceil(spec.t_final / cfg.dt - 1e-9));
                std::size_t next_out = 0;
                for (long step = 1; step <= steps; ++step) {
                    const StepResult st = advance_timestep(d, s, cfg);
                    result.picard_iterations += st.iterations;
                    const State prev = std::move(s);
                    s = st.next;
                    s.t = step * cfg.dt;
                    if (last) {
                        const EnergyLedger led = energy_report(d, prev, s, st, cfg);
                        result.energy.push_back(energy_row(d, s, led.residual));
                        while (next_out < spec.output_times.size() &&
                               spec.output_times[next_out] <= s.t + 0.5 * cfg.dt) {
                            write_fields(spec, d, s, "fields_t" + time_tag(s.t));
                            ++next_out;
                        }
                    }
                }
                if (tg) {
                    row.err_u = l2_error(d.spaces(), s.u, ex.u, s.t);
                    row.err_w = l2_error(d.spaces(), ScalarKind::vorticity, s.w, ex.w, s.t);
                    // the stored pressure lives at the last midpoint
                    row.err_p = l2_error(d.spaces(), ScalarKind::pressure, s.p, ex.p, s.t - 0.5 * cfg.dt, true);
                }
            }

            const FineNorms fn = fine_norms(d, s);
            row.norm_w_fine = fn.w;
            row.norm_u_fine = fn.u;
            row.norm_p_fine = fn.p;
            result.errors.push_back(row);

            if (last) {
                if (!transient_case(spec.name)) {
                    result.energy.push_back(energy_row(d, s, 0.0));
                }
                write_fields(spec, d, s, transient_case(spec.name) ? "fields_t" + time_tag(s.t) : "fields");
                result.final_state = s;
            }
        }
        catch (const CaseError&) {
            throw;
        }
        catch (const std::exception& e) {
            throw CaseError(spec.name, std::string(e.what()) + " (mesh " + std::to_string(n) + ")");
        }
    }

    if (!spec.out_dir.empty()) {
        const std::filesystem::path dir(spec.out_dir);
        std::ofstream er(dir / "errors.csv");
        write_errors_csv(er, result.errors);
        std::ofstream en(dir / "energy.csv");
        write_energy_csv(en, result.energy);
    }
    return result;
}

}   // namespace vmsns::bench
