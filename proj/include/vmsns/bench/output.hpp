#pragma once

#include "vmsns/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vmsns::bench {

struct ErrorRow {
    std::string case_name;
    int nx = 0;
    int ny = 0;
    int k = 0;
    int kprime = 0;
    double re_inv = 0.0;
    double dt = 0.0;
    double err_w = 0.0;
    double err_u = 0.0;
    double err_p = 0.0;
    double norm_w_fine = 0.0;
    double norm_u_fine = 0.0;
    double norm_p_fine = 0.0;
};

struct EnergyRow {
    double t = 0.0;
    double k_coarse = 0.0;
    double k_fine = 0.0;
    double k_total = 0.0;
    double residual = 0.0;
};

/// Coarse fields sampled at the cell centres of an n x n grid.
struct SampledGrid {
    int n = 0;
    double x0 = 0.0, y0 = 0.0;
    double dx = 0.0, dy = 0.0;
    std::vector<double> w, umag, p;   // row-major, x fastest
};

SampledGrid sample_grid(const Discretization& disc, const State& s, int n);

void write_errors_csv(std::ostream& os, const std::vector<ErrorRow>& rows);
void write_energy_csv(std::ostream& os, const std::vector<EnergyRow>& rows);
void write_fields_csv(std::ostream& os, const SampledGrid& g);
/// Legacy ASCII VTK STRUCTURED_POINTS with scalars omega, velocity_magnitude, pressure.
void write_fields_vtk(std::ostream& os, const SampledGrid& g, const std::string& title);

/// "inf" for zero, otherwise 1/re_inv.
std::string format_re(double re_inv);

}   // namespace vmsns::bench
