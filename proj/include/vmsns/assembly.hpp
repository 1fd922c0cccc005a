#pragma once

#include "vmsns/bubbles.hpp"
#include "vmsns/derham.hpp"
#include "vmsns/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace vmsns {

/// Gauss points per direction: max(kx, ky, k'x, k'y) + 1.
int default_quadrature_points(int kx, int ky, int kfx, int kfy);

/// Basis values of the coarse spaces (and optionally the bubbles) at the
/// quadrature points of one element. Rows are quadrature points.
struct ElementBasis {
    int element = 0;
    int ex = 0;
    int ey = 0;
    Eigen::VectorXd x;   // physical quadrature points
    Eigen::VectorXd y;
    Eigen::VectorXd w;   // weights including the Jacobian

    std::vector<int> dofs0;   // global V0 indices of local columns
    std::vector<int> dofs1;   // global V1 indices (y-components offset by dim1x)
    std::vector<int> dofs2;

    Eigen::MatrixXd n0, n0_dx, n0_dy;
    Eigen::MatrixXd ux, uy, div;
    Eigen::MatrixXd p;

    bool has_fine = false;
    BubbleValues fine;

    int nq() const { return static_cast<int>(w.size()); }
    int n0_local() const { return static_cast<int>(dofs0.size()); }
    int n1_local() const { return static_cast<int>(dofs1.size()); }
    int n2_local() const { return static_cast<int>(dofs2.size()); }
    int nc() const { return n0_local() + n1_local() + n2_local(); }
    int nf() const;
};

/// Per-element basis tables over a fixed quadrature rule.
class ElementTables {
public:
    ElementTables(const DeRhamSpaces2D& spaces, const BubbleComplex* bubbles, int n_gauss);

    ElementBasis basis(int element) const;
    const DeRhamSpaces2D& spaces() const { return *spaces_; }
    const BubbleComplex* bubbles() const { return bubbles_; }
    const QuadratureRule& rule() const { return rule_; }
    int n_gauss() const { return rule_.size(); }

private:
    struct Table1D {
        Eigen::MatrixXd val;   // gauss point x local function
        Eigen::MatrixXd der;
        std::vector<int> idx;
    };
    static std::vector<Table1D> build(const SplineSpace1D& s, const QuadratureRule& rule);

    const DeRhamSpaces2D* spaces_;
    const BubbleComplex* bubbles_;
    QuadratureRule rule_;
    std::vector<Table1D> xk_, xk1_, yk_, yk1_;
    BubbleValues fine_ref_;
};

/// Global coarse layout: [omega | u_x, u_y | p | lambda].
struct CoarseLayout {
    int n0 = 0;
    int n1 = 0;
    int n2 = 0;
    bool multiplier = false;

    int off_w() const { return 0; }
    int off_u() const { return n0; }
    int off_p() const { return n0 + n1; }
    int off_lambda() const { return n0 + n1 + n2; }
    int size() const { return n0 + n1 + n2 + (multiplier ? 1 : 0); }
};

CoarseLayout coarse_layout(const DeRhamSpaces2D& spaces);

/// Coefficients of the element kernel, covering both the Navier-Stokes step
/// and the Oseen problem.
struct KernelCoefficients {
    double mass = 0.0;          // (u + u', v + v')
    double conv = 1.0;          // all convection terms
    double visc = 0.0;          // (rot omega^h, v^h + v')
    double visc_fine = 0.0;     // (rot omega', v')
    double vort_coarse = 1.0;   // (u^h + u', rot tau^h)
    double vort_fine = 1.0;     // (u', rot tau')
    bool fine_convection = true;
};

/// Frozen fields sampled at the quadrature points of one element.
struct ElementFields {
    Eigen::VectorXd a1x, a1y;   // omega^h x a1 in the coarse momentum row
    Eigen::VectorXd a2x, a2y;   // omega' x a2 in the coarse momentum row
    Eigen::VectorXd a3x, a3y;   // omega^h x a3 in the fine momentum row
    Eigen::VectorXd wbar;       // wbar x u' in the fine momentum row
    Eigen::VectorXd tau_inv;
    Eigen::VectorXd load_x;     // momentum load at quadrature points
    Eigen::VectorXd load_y;

    static ElementFields zeros(int nq);
};

/// Dense element system with coarse rows/columns first, then fine ones in
/// the order [omega' | u' | p'].
struct ElementSystem {
    Eigen::MatrixXd K;
    Eigen::VectorXd b;
    int nc = 0;
    int nf = 0;
};

ElementSystem element_system(const ElementBasis& eb, const KernelCoefficients& kc, const ElementFields& fields,
                             bool with_fine);

/// The fine-scale block of one element.
struct ElementFineBlock {
    int element = 0;
    Eigen::MatrixXd kff;
    Eigen::MatrixXd kcf;   // coarse rows, fine columns
    Eigen::MatrixXd kfc;   // fine rows, coarse columns
    Eigen::VectorXd bf;
};

struct CondensedElement {
    Eigen::MatrixXd schur;   // -kcf kff^-1 kfc
    Eigen::VectorXd rhs;     // -kcf kff^-1 bf
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;   // of diag(row_scale) kff diag(col_scale)
    Eigen::VectorXd row_scale;
    Eigen::VectorXd col_scale;

    /// kff^-1 rhs
    Eigen::MatrixXd solve_fine(const Eigen::MatrixXd& rhs) const;
    Eigen::MatrixXd kfc;
    Eigen::VectorXd bf;

    /// u'_e = kff^-1 (bf - kfc x_c)
    Eigen::VectorXd recover(const Eigen::VectorXd& x_coarse_local) const;
};

class SingularElementError : public std::runtime_error {
public:
    SingularElementError(int element, double rcond);
    int element() const { return element_; }

private:
    int element_;
};

/// Throws SingularElementError when the fine block is numerically singular.
CondensedElement condense_element(const ElementFineBlock& block);

ElementFineBlock split_fine_block(const ElementSystem& sys, int element);

struct SparseSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    CoarseLayout layout;
    int n_fine_total = 0;   // monolithic systems only
};

/// Local coarse DOF list of an element in the global coarse layout.
std::vector<int> element_coarse_dofs(const ElementBasis& eb, const CoarseLayout& layout);

/// Scatter dense element blocks into a global sparse system in element order.
/// `blocks[e]` has rows/cols indexed by `dofs[e]`.
SparseSystem scatter(const CoarseLayout& layout, int n_total, const std::vector<std::vector<int>>& dofs,
                     const std::vector<Eigen::MatrixXd>& blocks, const std::vector<Eigen::VectorXd>& rhs);

/// Integrals of the V2 basis functions; the mean-value row of the multiplier.
Eigen::VectorXd pressure_integrals(const ElementTables& tables);

/// Append the mean-zero multiplier row and column to a system.
void add_mean_multiplier(SparseSystem& sys, const Eigen::VectorXd& integrals);

/// Forms that may be assembled individually over the coarse spaces.
enum class FormId {
    mass0,          // (omega, tau)
    mass1,          // (u, v)
    mass2,          // (p, q)
    rot_coupling,   // (rot omega, v): V1 rows, V0 columns
    pressure_div,   // (p, div v): V1 rows, V2 columns
    convection,     // (omega a_perp, v): V1 rows, V0 columns
};

/// Advecting field for the convection form.
using AdvectingField = std::function<Eigen::Vector2d(double, double)>;

/// Throws std::invalid_argument when a frozen field is required but missing.
Eigen::SparseMatrix<double> assemble_form(FormId id, const ElementTables& tables,
                                          const AdvectingField& advecting = nullptr);

/// Run `fn(e)` for every element on a pool of worker threads.
void parallel_for_elements(int n_elements, const std::function<void(int)>& fn);

}   // namespace vmsns
