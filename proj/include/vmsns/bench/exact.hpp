#pragma once

#include "vmsns/derham.hpp"

#include <string>

namespace vmsns::bench {

/// Closed-form fields of a benchmark: velocity, vorticity, pressure, the
/// forcing that makes them a solution, and rot of the vorticity.
struct ExactSolution {
    std::string name;
    VectorField u;
    ScalarField w;
    ScalarField p;
    VectorField forcing;
    VectorField rot_w;
};

/// u = rot(F(x) G(y)), F = x^4 - 2x^3 + x^2, G = y^4 - y^2, p = sin x sin y on [0,1]^2;
/// f = omega x u + Re^-1 rot omega + grad p.
ExactSolution exact_cavity_manufactured(double re_inv);

/// Mean of sin x sin y over the unit square.
double cavity_pressure_mean();

/// Taylor-Green vortex on [0, 2pi]^2 with total pressure p + |u|^2 / 2; f = 0.
ExactSolution exact_taylor_green(double re_inv);

/// Double shear layer on [0, 2pi]^2.
VectorField initial_shear_layer(double delta = 3.14159265358979323846 / 15.0, double eps = 0.05);

/// Kinetic energy of the initial shear layer, 1/2 int |u|^2, by composite Gauss quadrature.
double shear_layer_energy(double delta = 3.14159265358979323846 / 15.0, double eps = 0.05);

/// Lid: u = (1, 0) on the top side, zero elsewhere. The tangential part enters weakly, so corners need no care.
VectorField lid_velocity();

/// s rot(x y (1-x) (1-y)), divergence free and tangential on the unit square boundary.
VectorField oseen_beta(double s);

/// Largest |oseen_beta(1)| on the unit square.
double oseen_beta_unit_sup();

/// psi = g(x) g(y), g = x^3 (1-x)^3, omega = sqrt(nu) curl u, p = cos(pi x) cos(pi y);
/// f = sigma u + nu^-1/2 omega x beta + sqrt(nu) rot omega + grad p.
ExactSolution exact_oseen(double nu, double sigma, const VectorField& beta);

}   // namespace vmsns::bench
