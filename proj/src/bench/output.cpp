#include "vmsns/bench/output.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace vmsns::bench {

namespace {

std::string num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

void scalars(std::ostream& os, const char* name, const std::vector<double>& v)
{
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) {
        os << num(x) << '\n';
    }
}

}   // namespace

std::string format_re(double re_inv) { return re_inv == 0.0 ? "inf" : num(1.0 / re_inv); }

SampledGrid sample_grid(const Discretization& disc, const State& s, int n)
{
    const DeRhamSpaces2D& sp = disc.spaces();
    const Mesh2D& m = sp.mesh;
    SampledGrid g;
    g.n = n;
    g.dx = (m.x1 - m.x0) / n;
    g.dy = (m.y1 - m.y0) / n;
    g.x0 = m.x0 + 0.5 * g.dx;
    g.y0 = m.y0 + 0.5 * g.dy;
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            pts.push_back({g.x0 + i * g.dx, g.y0 + j * g.dy});
        }
    }
    const std::span<const double> uc(s.u.data(), static_cast<std::size_t>(s.u.size()));
    g.w = eval_field(sp.v0, {s.w.data(), static_cast<std::size_t>(s.w.size())}, pts);
    g.p = eval_field(sp.v2, {s.p.data(), static_cast<std::size_t>(s.p.size())}, pts);
    const auto ux = eval_field(sp.v1x, uc.subspan(0, sp.dim1x()), pts);
    const auto uy = eval_field(sp.v1y, uc.subspan(sp.dim1x()), pts);
    g.umag.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        g.umag[i] = std::hypot(ux[i], uy[i]);
    }
    return g;
}

void write_errors_csv(std::ostream& os, const std::vector<ErrorRow>& rows)
{
    os << "case,nx,ny,k,kprime,re,dt,err_w,err_u,err_p,norm_w_fine,norm_u_fine,norm_p_fine\n";
    for (const auto& r : rows) {
        os << r.case_name << ',' << r.nx << ',' << r.ny << ',' << r.k << ',' << r.kprime << ',' << format_re(r.re_inv)
           << ',' << num(r.dt) << ',' << num(r.err_w) << ',' << num(r.err_u) << ',' << num(r.err_p) << ','
           << num(r.norm_w_fine) << ',' << num(r.norm_u_fine) << ',' << num(r.norm_p_fine) << '\n';
    }
}

void write_energy_csv(std::ostream& os, const std::vector<EnergyRow>& rows)
{
    os << "t,K_coarse,K_fine,K_total,energy_residual\n";
    for (const auto& r : rows) {
        os << num(r.t) << ',' << num(r.k_coarse) << ',' << num(r.k_fine) << ',' << num(r.k_total) << ','
           << num(r.residual) << '\n';
    }
}

void write_fields_csv(std::ostream& os, const SampledGrid& g)
{
    os << "x,y,omega,velocity_magnitude,pressure\n";
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const std::size_t q = static_cast<std::size_t>(j) * g.n + i;
            os << num(g.x0 + i * g.dx) << ',' << num(g.y0 + j * g.dy) << ',' << num(g.w[q]) << ',' << num(g.umag[q])
               << ',' << num(g.p[q]) << '\n';
        }
    }
}

void write_fields_vtk(std::ostream& os, const SampledGrid& g, const std::string& title)
{
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.n << ' ' << g.n << " 1\n";
    os << "ORIGIN " << num(g.x0) << ' ' << num(g.y0) << " 0\n";
    os << "SPACING " << num(g.dx) << ' ' << num(g.dy) << " 1\n";
    os << "POINT_DATA " << static_cast<long>(g.n) * g.n << '\n';
    scalars(os, "omega", g.w);
    scalars(os, "velocity_magnitude", g.umag);
    scalars(os, "pressure", g.p);
}

}   // namespace vmsns::bench
