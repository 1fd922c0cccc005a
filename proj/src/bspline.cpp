#include "vmsns/bspline.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vmsns {

KnotVector::KnotVector(int degree, double lower, double upper, int n_elements, KnotFlavor flavor)
    : degree_(degree), lower_(lower), upper_(upper), n_elements_(n_elements), flavor_(flavor)
{
    if (degree < 0) {
        throw std::invalid_argument("KnotVector: negative degree");
    }
    if (n_elements < 1) {
        throw std::invalid_argument("KnotVector: need at least one element");
    }
    if (!(upper > lower)) {
        throw std::invalid_argument("KnotVector: breakpoints must be strictly increasing");
    }
}

std::vector<double> KnotVector::breakpoints() const
{
    std::vector<double> out(n_elements_ + 1);
    const double h = element_size();
    for (int i = 0; i <= n_elements_; ++i) {
        out[i] = lower_ + i * h;
    }
    out.back() = upper_;
    return out;
}

std::vector<double> KnotVector::full_knots() const
{
    if (periodic()) {
        throw std::logic_error("KnotVector::full_knots: periodic knot vectors have no finite full sequence");
    }
    std::vector<double> out;
    out.reserve(n_elements_ + 2 * degree_ + 1);
    for (int i = 0; i < n_elements_ + 2 * degree_ + 1; ++i) {
        out.push_back(knot(i));
    }
    return out;
}

double KnotVector::knot(int i) const
{
    const int shifted = i - degree_;
    if (!periodic()) {
        if (shifted <= 0) {
            return lower_;
        }
        if (shifted >= n_elements_) {
            return upper_;
        }
    }
    return lower_ + shifted * element_size();
}

double KnotVector::wrap(double x) const
{
    const double period = upper_ - lower_;
    double r = std::fmod(x - lower_, period);
    if (r < 0.0) {
        r += period;
    }
    if (r >= period) {
        r -= period;
    }
    return lower_ + r;
}

int KnotVector::element_of(double x) const
{
    const double period = upper_ - lower_;
    if (periodic()) {
        x = wrap(x);
    }
    else {
        const double slack = 1e-12 * period;
        if (x < lower_ - slack || x > upper_ + slack || std::isnan(x)) {
            throw std::domain_error("point " + std::to_string(x) + " outside [" + std::to_string(lower_) + ", " +
                                    std::to_string(upper_) + "]");
        }
    }
    int e = static_cast<int>(std::floor((x - lower_) / element_size()));
    if (e < 0) {
        e = 0;
    }
    if (e >= n_elements_) {
        e = n_elements_ - 1;
    }
    return e;
}

SplineSpace1D::SplineSpace1D(KnotVector knots) : knots_(std::move(knots)) {}

int SplineSpace1D::dim() const
{
    return knots_.periodic() ? knots_.n_elements() : knots_.n_elements() + knots_.degree();
}

int SplineSpace1D::global_index(int first_index, int local) const
{
    const int idx = first_index + local;
    if (!knots_.periodic()) {
        return idx;
    }
    const int n = knots_.n_elements();
    return ((idx % n) + n) % n;
}

int SplineSpace1D::first_index_on_element(int element) const { return element; }

std::vector<std::vector<double>> SplineSpace1D::eval_all(double x, int max_deriv) const
{
    const int e = knots_.element_of(x);
    if (knots_.periodic()) {
        x = knots_.wrap(x);
    }
    return eval_all_on_element(e, x, max_deriv);
}

// Cox-de Boor triangle with the degree-lowering derivative recurrences
// (Piegl & Tiller, "The NURBS Book", algorithm A2.3).
std::vector<std::vector<double>> SplineSpace1D::eval_all_on_element(int element, double x, int max_deriv) const
{
    const int p = knots_.degree();
    const int span = element + p;
    const auto U = [this](int i) { return knots_.knot(i); };

    std::vector<std::vector<double>> ders(max_deriv + 1, std::vector<double>(p + 1, 0.0));
    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1, 0.0);
    std::vector<double> right(p + 1, 0.0);

    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U(span + 1 - j);
        right[j] = U(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) {
        ders[0][j] = ndu[j][p];
    }

    const int nd = std::min(max_deriv, p);
    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) {
            ders[k][j] *= factor;
        }
        factor *= (p - k);
    }
    return ders;
}

LocalBasis eval_basis(const SplineSpace1D& space, double x, int deriv)
{
    if (deriv < 0 || deriv > 2) {
        throw std::invalid_argument("eval_basis: derivative order must be in 0..2");
    }
    if (deriv > space.degree()) {
        throw std::invalid_argument("eval_basis: derivative order exceeds degree");
    }
    const int e = space.knots().element_of(x);
    const double xx = space.periodic() ? space.knots().wrap(x) : x;
    auto all = space.eval_all_on_element(e, xx, deriv);
    return LocalBasis{space.first_index_on_element(e), std::move(all[deriv])};
}

DerivativeMap derivative_map(const SplineSpace1D& space)
{
    const int p = space.degree();
    if (p < 1) {
        throw std::invalid_argument("derivative_map: degree 0 spaces have no derived space");
    }
    const KnotVector& kv = space.knots();
    SplineSpace1D derived(p - 1, kv.lower(), kv.upper(), kv.n_elements(), kv.flavor());
    const int n_out = derived.dim();
    const int n_in = space.dim();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * n_out);
    for (int i = 0; i < n_out; ++i) {
        const double scale = p / (kv.knot(i + p + 1) - kv.knot(i + 1));
        const int lo = i;
        const int hi = space.periodic() ? (i + 1) % n_in : i + 1;
        trip.emplace_back(i, hi, scale);
        trip.emplace_back(i, lo, -scale);
    }
    Eigen::SparseMatrix<double> map(n_out, n_in);
    map.setFromTriplets(trip.begin(), trip.end());
    map.prune(0.0);
    return DerivativeMap{std::move(derived), std::move(map)};
}

double eval_spline(const SplineSpace1D& space, const std::vector<double>& coeffs, double x, int deriv)
{
    if (static_cast<int>(coeffs.size()) != space.dim()) {
        throw std::invalid_argument("eval_spline: coefficient count does not match space dimension");
    }
    const int e = space.knots().element_of(x);
    const double xx = space.periodic() ? space.knots().wrap(x) : x;
    const auto all = space.eval_all_on_element(e, xx, deriv);
    if (deriv > space.degree()) {
        return 0.0;
    }
    double v = 0.0;
    for (int i = 0; i <= space.degree(); ++i) {
        v += coeffs[space.global_index(e, i)] * all[deriv][i];
    }
    return v;
}

std::vector<double> greville_points(const SplineSpace1D& space)
{
    const int p = space.degree();
    std::vector<double> out(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
        if (p == 0) {
            out[i] = 0.5 * (space.knots().knot(i) + space.knots().knot(i + 1));
            continue;
        }
        double s = 0.0;
        for (int j = 1; j <= p; ++j) {
            s += space.knots().knot(i + j);
        }
        out[i] = s / p;
    }
    return out;
}

}   // namespace vmsns
