#pragma once

#include <Eigen/Sparse>

#include <utility>
#include <vector>

namespace vmsns {

enum class KnotFlavor { open_clamped, periodic };

/// Uniform knot vector on [lower, upper] with `n_elements` equal spans.
///
/// For the open-clamped flavor the derived full knot sequence repeats each end
/// knot degree+1 times. The periodic flavor is realized by index wrapping of
/// uniform B-splines, so no ghost knots are stored.
class KnotVector {
public:
    KnotVector(int degree, double lower, double upper, int n_elements, KnotFlavor flavor);

    int degree() const { return degree_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    int n_elements() const { return n_elements_; }
    KnotFlavor flavor() const { return flavor_; }
    double element_size() const { return (upper_ - lower_) / n_elements_; }
    bool periodic() const { return flavor_ == KnotFlavor::periodic; }

    std::vector<double> breakpoints() const;
    /// Full knot sequence (open-clamped only).
    std::vector<double> full_knots() const;

    /// Knot with index `i` in the (conceptually infinite, for periodic) sequence
    /// whose span [knot(degree), knot(degree+1)] is the first element.
    double knot(int i) const;

    /// Element containing x. Periodic spaces wrap x into the base period; the
    /// right end point belongs to the last element.
    int element_of(double x) const;
    /// Wrap a periodic coordinate into [lower, upper).
    double wrap(double x) const;

private:
    int degree_;
    double lower_;
    double upper_;
    int n_elements_;
    KnotFlavor flavor_;
};

/// Nonzero basis functions (or derivatives) at one point.
struct LocalBasis {
    int first_index = 0;          // unwrapped global index of values[0]
    std::vector<double> values;   // degree+1 entries
};

/// Univariate maximally smooth B-spline space over a uniform partition.
class SplineSpace1D {
public:
    explicit SplineSpace1D(KnotVector knots);
    SplineSpace1D(int degree, double lower, double upper, int n_elements, KnotFlavor flavor)
        : SplineSpace1D(KnotVector(degree, lower, upper, n_elements, flavor))
    {
    }

    const KnotVector& knots() const { return knots_; }
    int degree() const { return knots_.degree(); }
    int dim() const;
    int n_elements() const { return knots_.n_elements(); }
    bool periodic() const { return knots_.periodic(); }

    /// Global index of the i-th local function in `element`, wrapped for periodic spaces.
    int global_index(int first_index, int local) const;
    /// Unwrapped index of the first nonzero function on `element`.
    int first_index_on_element(int element) const;

    /// Values of all degree+1 nonzero functions and their derivatives up to
    /// `max_deriv` at x. Row d of the result holds the d-th derivative.
    std::vector<std::vector<double>> eval_all(double x, int max_deriv) const;
    /// Same, with x already known to lie in `element` (x may be an end point).
    std::vector<std::vector<double>> eval_all_on_element(int element, double x, int max_deriv) const;

private:
    KnotVector knots_;
};

/// Nonzero basis values (deriv = 0) or derivative values at x.
/// Throws std::domain_error when x lies outside a non-periodic domain and
/// std::invalid_argument when deriv is out of range.
LocalBasis eval_basis(const SplineSpace1D& space, double x, int deriv);

/// Exact coefficient-level representation of d/dx : S_p -> S_{p-1}.
struct DerivativeMap {
    SplineSpace1D derived_space;
    Eigen::SparseMatrix<double> map;   // derived_space.dim() x space.dim()
};

/// Throws std::invalid_argument for degree 0.
DerivativeMap derivative_map(const SplineSpace1D& space);

/// Evaluate the spline with coefficients `coeffs` (deriv-th derivative) at x.
double eval_spline(const SplineSpace1D& space, const std::vector<double>& coeffs, double x, int deriv = 0);

/// Greville abscissae of an open-clamped space.
std::vector<double> greville_points(const SplineSpace1D& space);

}   // namespace vmsns
