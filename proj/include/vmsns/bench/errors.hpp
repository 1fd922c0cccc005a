#pragma once

#include "vmsns/derham.hpp"
#include "vmsns/solver.hpp"

#include <Eigen/Dense>

#include <vector>

namespace vmsns::bench {

enum class ScalarKind { vorticity, pressure };

/// sqrt(int (field - exact)^2) by Gauss quadrature with `n_points` per
/// direction (0: max(kx, ky) + 2). With `subtract_mean` the mean of the
/// difference is removed first.
double l2_error(const DeRhamSpaces2D& spaces, ScalarKind kind, const Eigen::VectorXd& coeffs, const ScalarField& exact,
                double t, bool subtract_mean = false, int n_points = 0);

/// Velocity error from V1 coefficients.
double l2_error(const DeRhamSpaces2D& spaces, const Eigen::VectorXd& coeffs, const VectorField& exact, double t,
                int n_points = 0);

struct FineNorms {
    double w = 0.0;
    double u = 0.0;
    double p = 0.0;
};

/// L2 norms of the fine-scale fields of a state.
FineNorms fine_norms(const Discretization& disc, const State& s);

struct ConvergenceTable {
    double slope = 0.0;                // least-squares slope of log e vs log h
    std::vector<double> pairwise;      // rates between consecutive meshes
};

/// Throws std::invalid_argument for fewer than two meshes or errors that are
/// zero, negative or not finite.
ConvergenceTable convergence_table(const std::vector<double>& h, const std::vector<double>& errors);

}   // namespace vmsns::bench
