#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmsns {

/// Named contiguous range of unknowns, used to report where a solve broke down.
struct BlockInfo {
    std::string name;
    int begin = 0;
    int end = 0;
};

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, std::string block, int index)
        : std::runtime_error(what), block_(std::move(block)), index_(index)
    {
    }
    const std::string& block() const { return block_; }
    int index() const { return index_; }

private:
    std::string block_;
    int index_;
};

/// Sparse LU solver that keeps the symbolic analysis while the sparsity
/// pattern is unchanged.
class LinearSolver {
public:
    LinearSolver();
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    /// Throws SingularSystemError on a (numerically) zero pivot and
    /// std::runtime_error when the relative residual exceeds 1e-10.
    Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          const std::vector<BlockInfo>& blocks = {});

    /// Number of symbolic analyses performed so far.
    int analyses() const { return analyses_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int analyses_ = 0;
};

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             const std::vector<BlockInfo>& blocks = {});

}   // namespace vmsns
