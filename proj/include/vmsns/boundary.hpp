#pragma once

#include "vmsns/assembly.hpp"
#include "vmsns/derham.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace vmsns {

/// Mask over the coarse layout of DOFs fixed by essential conditions.
std::vector<char> constrained_dofs(const DeRhamSpaces2D& spaces, const CoarseLayout& layout);

/// Values of the essential DOFs at time t: normal velocity by L2 projection
/// onto the edge trace space, vorticity by boundary least squares.
Eigen::VectorXd essential_values(const DeRhamSpaces2D& spaces, const BoundaryData& data, double t,
                                 const CoarseLayout& layout);

/// Natural boundary loads at time t: -(p_hat, v.n) on the pressure part and
/// -(u_hat_t, tau) on the tangential-velocity part.
Eigen::VectorXd boundary_load(const DeRhamSpaces2D& spaces, const BoundaryData& data, double t,
                              const CoarseLayout& layout);

/// A system with essential DOFs eliminated.
struct ConstrainedSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    std::vector<int> free_to_full;
    Eigen::VectorXd fixed;   // full-length vector holding the essential values

    Eigen::VectorXd expand(const Eigen::VectorXd& x_free) const;
};

/// Eliminate DOFs flagged in `constrained`: A_ff x_f = b_f - A_fd x_d.
/// Throws std::invalid_argument on size mismatch.
ConstrainedSystem apply_bc(const SparseSystem& system, const std::vector<char>& constrained,
                           const Eigen::VectorXd& values);

}   // namespace vmsns
