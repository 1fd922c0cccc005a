#include "vmsns/linear_solve.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace vmsns {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

/// SparseLU with access to the pivots of U, which SuperLU-style storage keeps
/// on the diagonal of the supernodal L factor.
class PivotLU : public Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> {
public:
    /// Returns the permuted column with the smallest |pivot| and the ratio min/max.
    std::pair<int, double> weakest_pivot() const
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        int arg = 0;
        for (Eigen::Index j = 0; j < this->cols(); ++j) {
            double d = 0.0;
            for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
                if (it.index() == j) {
                    d = std::abs(it.value());
                    break;
                }
            }
            if (d < lo) {
                lo = d;
                arg = static_cast<int>(j);
            }
            hi = std::max(hi, d);
        }
        return {arg, hi > 0.0 ? lo / hi : 0.0};
    }

    int original_column(int permuted) const
    {
        const auto& idx = m_perm_c.indices();
        for (Eigen::Index i = 0; i < idx.size(); ++i) {
            if (idx(i) == permuted) {
                return static_cast<int>(i);
            }
        }
        return permuted;
    }
};

std::string block_of(const std::vector<BlockInfo>& blocks, int index)
{
    for (const auto& b : blocks) {
        if (index >= b.begin && index < b.end) {
            return b.name;
        }
    }
    return "unknown";
}

constexpr double pivot_ratio_tol = 1e-13;
constexpr double residual_tol = 1e-10;

}   // namespace

struct LinearSolver::Impl {
    PivotLU lu;
    std::vector<int> outer;
    std::vector<int> inner;
    bool analyzed = false;

    bool same_pattern(const SpMat& A) const
    {
        if (!analyzed || static_cast<Eigen::Index>(outer.size()) != A.outerSize() + 1 ||
            static_cast<Eigen::Index>(inner.size()) != A.nonZeros()) {
            return false;
        }
        for (Eigen::Index i = 0; i <= A.outerSize(); ++i) {
            if (outer[i] != A.outerIndexPtr()[i]) {
                return false;
            }
        }
        for (Eigen::Index i = 0; i < A.nonZeros(); ++i) {
            if (inner[i] != A.innerIndexPtr()[i]) {
                return false;
            }
        }
        return true;
    }
};

LinearSolver::LinearSolver() : impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXd LinearSolver::solve(const SpMat& A_in, const Eigen::VectorXd& b, const std::vector<BlockInfo>& blocks)
{
    if (A_in.rows() != A_in.cols() || A_in.rows() != b.size()) {
        throw std::invalid_argument("linear_solve: dimension mismatch");
    }
    SpMat A = A_in;
    A.makeCompressed();
    Impl& im = *impl_;
    if (!im.same_pattern(A)) {
        im.lu.analyzePattern(A);
        im.outer.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
        im.inner.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
        im.analyzed = true;
        ++analyses_;
    }
    im.lu.factorize(A);
    if (im.lu.info() != Eigen::Success) {
        const auto [col, ratio] = im.lu.weakest_pivot();
        const int orig = im.lu.original_column(col);
        std::ostringstream os;
        os << "sparse LU failed (" << im.lu.lastErrorMessage() << "); weakest pivot in block '" << block_of(blocks, orig)
           << "' at unknown " << orig;
        throw SingularSystemError(os.str(), block_of(blocks, orig), orig);
    }
    const auto [col, ratio] = im.lu.weakest_pivot();
    if (ratio < pivot_ratio_tol) {
        const int orig = im.lu.original_column(col);
        std::ostringstream os;
        os << "numerically singular system: pivot ratio " << ratio << " in block '" << block_of(blocks, orig)
           << "' at unknown " << orig;
        throw SingularSystemError(os.str(), block_of(blocks, orig), orig);
    }

    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        return Eigen::VectorXd::Zero(b.size());
    }
    Eigen::VectorXd x = im.lu.solve(b);
    Eigen::VectorXd r = b - A * x;
    for (int it = 0; it < 3 && r.norm() > 1e-14 * bnorm; ++it) {
        x += im.lu.solve(r);
        r = b - A * x;
    }
    const double rel = r.norm() / bnorm;
    if (!(rel <= residual_tol)) {
        std::ostringstream os;
        os << "linear solve residual " << rel << " exceeds " << residual_tol;
        throw std::runtime_error(os.str());
    }
    return x;
}

Eigen::VectorXd linear_solve(const SpMat& A, const Eigen::VectorXd& b, const std::vector<BlockInfo>& blocks)
{
    LinearSolver s;
    return s.solve(A, b, blocks);
}

}   // namespace vmsns
