#include "vmsns/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace vmsns {

int default_quadrature_points(int kx, int ky, int kfx, int kfy) { return std::max({kx, ky, kfx, kfy}) + 1; }

int ElementBasis::nf() const { return has_fine ? static_cast<int>(fine.w0.cols() + fine.u_x.cols() + fine.p.cols()) : 0; }

std::vector<ElementTables::Table1D> ElementTables::build(const SplineSpace1D& s, const QuadratureRule& rule)
{
    const int ne = s.n_elements();
    const int p = s.degree();
    const double h = s.knots().element_size();
    std::vector<Table1D> out(ne);
    for (int e = 0; e < ne; ++e) {
        Table1D& t = out[e];
        t.val.resize(rule.size(), p + 1);
        t.der.resize(rule.size(), p + 1);
        for (int q = 0; q < rule.size(); ++q) {
            const double x = s.knots().lower() + (e + rule.points[q]) * h;
            const auto r = s.eval_all_on_element(e, x, 1);
            for (int a = 0; a <= p; ++a) {
                t.val(q, a) = r[0][a];
                t.der(q, a) = r[1][a];
            }
        }
        for (int a = 0; a <= p; ++a) {
            t.idx.push_back(s.global_index(s.first_index_on_element(e), a));
        }
    }
    return out;
}

ElementTables::ElementTables(const DeRhamSpaces2D& spaces, const BubbleComplex* bubbles, int n_gauss)
    : spaces_(&spaces), bubbles_(bubbles), rule_(gauss_legendre(n_gauss))
{
    xk_ = build(spaces.v0.sx, rule_);
    yk_ = build(spaces.v0.sy, rule_);
    xk1_ = build(spaces.v2.sx, rule_);
    yk1_ = build(spaces.v2.sy, rule_);
    if (bubbles_ != nullptr) {
        std::vector<Point2> ref;
        for (int qy = 0; qy < rule_.size(); ++qy) {
            for (int qx = 0; qx < rule_.size(); ++qx) {
                ref.push_back({rule_.points[qx], rule_.points[qy]});
            }
        }
        fine_ref_ = bubbles_->eval_reference(ref, spaces.mesh.hx(), spaces.mesh.hy());
    }
}

ElementBasis ElementTables::basis(int element) const
{
    const DeRhamSpaces2D& s = *spaces_;
    const Mesh2D& m = s.mesh;
    ElementBasis eb;
    eb.element = element;
    eb.ex = element % m.nx;
    eb.ey = element / m.nx;
    const int ng = rule_.size();
    const int nq = ng * ng;
    const double hx = m.hx();
    const double hy = m.hy();

    eb.x.resize(nq);
    eb.y.resize(nq);
    eb.w.resize(nq);
    for (int qy = 0; qy < ng; ++qy) {
        for (int qx = 0; qx < ng; ++qx) {
            const int q = qy * ng + qx;
            eb.x(q) = m.x0 + (eb.ex + rule_.points[qx]) * hx;
            eb.y(q) = m.y0 + (eb.ey + rule_.points[qy]) * hy;
            eb.w(q) = rule_.weights[qx] * rule_.weights[qy] * hx * hy;
        }
    }

    const Table1D& X = xk_[eb.ex];
    const Table1D& X1 = xk1_[eb.ex];
    const Table1D& Y = yk_[eb.ey];
    const Table1D& Y1 = yk1_[eb.ey];
    const int kx = s.kx;
    const int ky = s.ky;

    // V0
    const int n0 = (kx + 1) * (ky + 1);
    eb.n0.resize(nq, n0);
    eb.n0_dx.resize(nq, n0);
    eb.n0_dy.resize(nq, n0);
    for (int b = 0; b <= ky; ++b) {
        for (int a = 0; a <= kx; ++a) {
            const int c = a + b * (kx + 1);
            eb.dofs0.push_back(s.v0.index(X.idx[a], Y.idx[b]));
            for (int qy = 0; qy < ng; ++qy) {
                for (int qx = 0; qx < ng; ++qx) {
                    const int q = qy * ng + qx;
                    eb.n0(q, c) = X.val(qx, a) * Y.val(qy, b);
                    eb.n0_dx(q, c) = X.der(qx, a) * Y.val(qy, b);
                    eb.n0_dy(q, c) = X.val(qx, a) * Y.der(qy, b);
                }
            }
        }
    }

    // V1
    const int n1x = (kx + 1) * ky;
    const int n1 = n1x + kx * (ky + 1);
    eb.ux.setZero(nq, n1);
    eb.uy.setZero(nq, n1);
    eb.div.setZero(nq, n1);
    for (int b = 0; b < ky; ++b) {
        for (int a = 0; a <= kx; ++a) {
            const int c = a + b * (kx + 1);
            eb.dofs1.push_back(s.v1x.index(X.idx[a], Y1.idx[b]));
            for (int qy = 0; qy < ng; ++qy) {
                for (int qx = 0; qx < ng; ++qx) {
                    const int q = qy * ng + qx;
                    eb.ux(q, c) = X.val(qx, a) * Y1.val(qy, b);
                    eb.div(q, c) = X.der(qx, a) * Y1.val(qy, b);
                }
            }
        }
    }
    for (int b = 0; b <= ky; ++b) {
        for (int a = 0; a < kx; ++a) {
            const int c = n1x + a + b * kx;
            eb.dofs1.push_back(s.dim1x() + s.v1y.index(X1.idx[a], Y.idx[b]));
            for (int qy = 0; qy < ng; ++qy) {
                for (int qx = 0; qx < ng; ++qx) {
                    const int q = qy * ng + qx;
                    eb.uy(q, c) = X1.val(qx, a) * Y.val(qy, b);
                    eb.div(q, c) = X1.val(qx, a) * Y.der(qy, b);
                }
            }
        }
    }

    // V2
    const int n2 = kx * ky;
    eb.p.resize(nq, n2);
    for (int b = 0; b < ky; ++b) {
        for (int a = 0; a < kx; ++a) {
            const int c = a + b * kx;
            eb.dofs2.push_back(s.v2.index(X1.idx[a], Y1.idx[b]));
            for (int qy = 0; qy < ng; ++qy) {
                for (int qx = 0; qx < ng; ++qx) {
                    eb.p(qy * ng + qx, c) = X1.val(qx, a) * Y1.val(qy, b);
                }
            }
        }
    }

    if (bubbles_ != nullptr) {
        eb.has_fine = true;
        eb.fine = fine_ref_;
    }
    return eb;
}

CoarseLayout coarse_layout(const DeRhamSpaces2D& spaces)
{
    return CoarseLayout{spaces.dim0(), spaces.dim1(), spaces.dim2(), spaces.mean_zero_pressure};
}

ElementFields ElementFields::zeros(int nq)
{
    ElementFields f;
    for (Eigen::VectorXd* v : {&f.a1x, &f.a1y, &f.a2x, &f.a2y, &f.a3x, &f.a3y, &f.wbar, &f.tau_inv, &f.load_x, &f.load_y}) {
        v->setZero(nq);
    }
    return f;
}

namespace {

// A^T diag(w) B
Eigen::MatrixXd wprod(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b)
{
    return a.transpose() * (w.asDiagonal() * b);
}

}   // namespace

ElementSystem element_system(const ElementBasis& eb, const KernelCoefficients& kc, const ElementFields& f,
                             bool with_fine)
{
    const bool fine = with_fine && eb.has_fine;
    const int n0 = eb.n0_local();
    const int n1 = eb.n1_local();
    const int nc = eb.nc();
    const int nf = fine ? eb.nf() : 0;
    const int iw = 0;
    const int iu = n0;
    const int ip = n0 + n1;

    ElementSystem sys;
    sys.nc = nc;
    sys.nf = nf;
    sys.K.setZero(nc + nf, nc + nf);
    sys.b.setZero(nc + nf);
    auto& K = sys.K;
    const Eigen::VectorXd& w = eb.w;

    const Eigen::VectorXd wa1x = w.cwiseProduct(f.a1x);
    const Eigen::VectorXd wa1y = w.cwiseProduct(f.a1y);
    const Eigen::VectorXd wlx = w.cwiseProduct(f.load_x);
    const Eigen::VectorXd wly = w.cwiseProduct(f.load_y);

    // coarse momentum
    K.block(iu, iu, n1, n1) += kc.mass * (wprod(eb.ux, w, eb.ux) + wprod(eb.uy, w, eb.uy));
    K.block(iu, iw, n1, n0) += kc.conv * (wprod(eb.ux, -wa1y, eb.n0) + wprod(eb.uy, wa1x, eb.n0)) +
                               kc.visc * (wprod(eb.ux, w, eb.n0_dy) - wprod(eb.uy, w, eb.n0_dx));
    K.block(iu, ip, n1, eb.n2_local()) -= wprod(eb.div, w, eb.p);
    sys.b.segment(iu, n1) += eb.ux.transpose() * wlx + eb.uy.transpose() * wly;

    // coarse mass
    K.block(ip, iu, eb.n2_local(), n1) += wprod(eb.p, w, eb.div);

    // coarse vorticity
    K.block(iw, iw, n0, n0) += wprod(eb.n0, w, eb.n0);
    K.block(iw, iu, n0, n1) -= kc.vort_coarse * (wprod(eb.n0_dy, w, eb.ux) - wprod(eb.n0_dx, w, eb.uy));

    if (!fine) {
        return sys;
    }

    const BubbleValues& F = eb.fine;
    const int m0 = static_cast<int>(F.w0.cols());
    const int m1 = static_cast<int>(F.u_x.cols());
    const int m2 = static_cast<int>(F.p.cols());
    const int fw = nc;
    const int fu = nc + m0;
    const int fp = nc + m0 + m1;

    // coarse rows, fine columns
    K.block(iu, fu, n1, m1) += kc.mass * (wprod(eb.ux, w, F.u_x) + wprod(eb.uy, w, F.u_y));
    K.block(iu, fw, n1, m0) +=
        kc.conv * (wprod(eb.ux, -w.cwiseProduct(f.a2y), F.w0) + wprod(eb.uy, w.cwiseProduct(f.a2x), F.w0));
    K.block(iw, fu, n0, m1) -= kc.vort_coarse * (wprod(eb.n0_dy, w, F.u_x) - wprod(eb.n0_dx, w, F.u_y));

    // fine momentum
    K.block(fu, iu, m1, n1) += kc.mass * (wprod(F.u_x, w, eb.ux) + wprod(F.u_y, w, eb.uy));
    K.block(fu, iw, m1, n0) +=
        kc.conv * (wprod(F.u_x, -w.cwiseProduct(f.a3y), eb.n0) + wprod(F.u_y, w.cwiseProduct(f.a3x), eb.n0)) +
        kc.visc * (wprod(F.u_x, w, eb.n0_dy) - wprod(F.u_y, w, eb.n0_dx));
    K.block(fu, ip, m1, eb.n2_local()) -= wprod(F.div, w, eb.p);

    const Eigen::VectorXd wt = w.cwiseProduct(f.tau_inv);
    K.block(fu, fu, m1, m1) += kc.mass * (wprod(F.u_x, w, F.u_x) + wprod(F.u_y, w, F.u_y)) +
                               (wprod(F.u_x, wt, F.u_x) + wprod(F.u_y, wt, F.u_y));
    if (kc.fine_convection) {
        const Eigen::VectorXd ww = w.cwiseProduct(f.wbar);
        K.block(fu, fu, m1, m1) += kc.conv * (wprod(F.u_y, ww, F.u_x) - wprod(F.u_x, ww, F.u_y));
    }
    K.block(fu, fw, m1, m0) += kc.visc_fine * (wprod(F.u_x, w, F.w0_dy) - wprod(F.u_y, w, F.w0_dx));
    K.block(fu, fp, m1, m2) -= wprod(F.div, w, F.p);
    sys.b.segment(fu, m1) += F.u_x.transpose() * wlx + F.u_y.transpose() * wly;

    // fine mass
    K.block(fp, fu, m2, m1) += wprod(F.p, w, F.div);

    // fine vorticity
    K.block(fw, fw, m0, m0) += wprod(F.w0, w, F.w0);
    K.block(fw, fu, m0, m1) -= kc.vort_fine * (wprod(F.w0_dy, w, F.u_x) - wprod(F.w0_dx, w, F.u_y));
    return sys;
}

ElementFineBlock split_fine_block(const ElementSystem& sys, int element)
{
    ElementFineBlock blk;
    blk.element = element;
    blk.kff = sys.K.bottomRightCorner(sys.nf, sys.nf);
    blk.kcf = sys.K.topRightCorner(sys.nc, sys.nf);
    blk.kfc = sys.K.bottomLeftCorner(sys.nf, sys.nc);
    blk.bf = sys.b.tail(sys.nf);
    return blk;
}

SingularElementError::SingularElementError(int element, double rcond)
    : std::runtime_error("singular fine-scale block on element " + std::to_string(element) +
                         " (reciprocal condition estimate " + std::to_string(rcond) +
                         "); check that tau_M^-1 > 0 or a mass term is present"),
      element_(element)
{
}

CondensedElement condense_element(const ElementFineBlock& block)
{
    CondensedElement c;
    if (block.kff.rows() == 0) {
        c.schur.setZero(block.kcf.rows(), block.kcf.rows());
        c.rhs.setZero(block.kcf.rows());
        return c;
    }
    // equilibrated so tau-dominated rows neither hide nor fake a zero pivot
    c.row_scale = block.kff.cwiseAbs().rowwise().maxCoeff();
    for (Eigen::Index i = 0; i < c.row_scale.size(); ++i) {
        if (!(c.row_scale(i) > 0.0)) {
            throw SingularElementError(block.element, 0.0);
        }
        c.row_scale(i) = 1.0 / c.row_scale(i);
    }
    const Eigen::MatrixXd rs = c.row_scale.asDiagonal() * block.kff;
    c.col_scale = rs.cwiseAbs().colwise().maxCoeff().transpose();
    for (Eigen::Index j = 0; j < c.col_scale.size(); ++j) {
        if (!(c.col_scale(j) > 0.0)) {
            throw SingularElementError(block.element, 0.0);
        }
        c.col_scale(j) = 1.0 / c.col_scale(j);
    }
    c.lu.compute(rs * c.col_scale.asDiagonal());
    const double pivot = c.lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const double rc = std::min(pivot, c.lu.rcond());
    if (!(rc > 1e-13)) {
        throw SingularElementError(block.element, rc);
    }
    c.schur = -block.kcf * c.solve_fine(block.kfc);
    c.rhs = -block.kcf * c.solve_fine(block.bf);
    c.kfc = block.kfc;
    c.bf = block.bf;
    return c;
}

Eigen::VectorXd CondensedElement::recover(const Eigen::VectorXd& x_coarse_local) const
{
    if (bf.size() == 0) {
        return Eigen::VectorXd();
    }
    return solve_fine(bf - kfc * x_coarse_local);
}

Eigen::MatrixXd CondensedElement::solve_fine(const Eigen::MatrixXd& rhs) const
{
    return col_scale.asDiagonal() * lu.solve(row_scale.asDiagonal() * rhs);
}

std::vector<int> element_coarse_dofs(const ElementBasis& eb, const CoarseLayout& layout)
{
    std::vector<int> d;
    d.reserve(eb.nc());
    for (int i : eb.dofs0) {
        d.push_back(layout.off_w() + i);
    }
    for (int i : eb.dofs1) {
        d.push_back(layout.off_u() + i);
    }
    for (int i : eb.dofs2) {
        d.push_back(layout.off_p() + i);
    }
    return d;
}

SparseSystem scatter(const CoarseLayout& layout, int n_total, const std::vector<std::vector<int>>& dofs,
                     const std::vector<Eigen::MatrixXd>& blocks, const std::vector<Eigen::VectorXd>& rhs)
{
    SparseSystem sys;
    sys.layout = layout;
    std::size_t nnz = 0;
    for (const auto& b : blocks) {
        nnz += static_cast<std::size_t>(b.size());
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nnz);
    sys.b.setZero(n_total);
    for (std::size_t e = 0; e < blocks.size(); ++e) {
        const auto& d = dofs[e];
        const auto& B = blocks[e];
        for (int j = 0; j < B.cols(); ++j) {
            for (int i = 0; i < B.rows(); ++i) {
                trip.emplace_back(d[i], d[j], B(i, j));
            }
        }
        for (int i = 0; i < rhs[e].size(); ++i) {
            sys.b(d[i]) += rhs[e](i);
        }
    }
    sys.A.resize(n_total, n_total);
    sys.A.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

Eigen::VectorXd pressure_integrals(const ElementTables& tables)
{
    const DeRhamSpaces2D& s = tables.spaces();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(s.dim2());
    for (int e = 0; e < s.mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const Eigen::VectorXd loc = eb.p.transpose() * eb.w;
        for (int i = 0; i < eb.n2_local(); ++i) {
            out(eb.dofs2[i]) += loc(i);
        }
    }
    return out;
}

void add_mean_multiplier(SparseSystem& sys, const Eigen::VectorXd& integrals)
{
    const int n = static_cast<int>(sys.A.rows());
    const int row = sys.layout.off_lambda();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.A.nonZeros() + 2 * integrals.size());
    for (int k = 0; k < sys.A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (int j = 0; j < integrals.size(); ++j) {
        trip.emplace_back(row, sys.layout.off_p() + j, integrals(j));
        trip.emplace_back(sys.layout.off_p() + j, row, integrals(j));
    }
    const int size = std::max(n, row + 1);
    Eigen::SparseMatrix<double> a(size, size);
    a.setFromTriplets(trip.begin(), trip.end());
    sys.A = std::move(a);
    if (sys.b.size() < size) {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
        b.head(sys.b.size()) = sys.b;
        sys.b = std::move(b);
    }
}

Eigen::SparseMatrix<double> assemble_form(FormId id, const ElementTables& tables, const AdvectingField& advecting)
{
    const DeRhamSpaces2D& s = tables.spaces();
    if (id == FormId::convection && !advecting) {
        throw std::invalid_argument("assemble_form: convection requires an advecting field");
    }
    int rows = 0;
    int cols = 0;
    switch (id) {
    case FormId::mass0: rows = cols = s.dim0(); break;
    case FormId::mass1: rows = cols = s.dim1(); break;
    case FormId::mass2: rows = cols = s.dim2(); break;
    case FormId::rot_coupling:
    case FormId::convection:
        rows = s.dim1();
        cols = s.dim0();
        break;
    case FormId::pressure_div:
        rows = s.dim1();
        cols = s.dim2();
        break;
    default: throw std::invalid_argument("assemble_form: unknown form id");
    }

    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < s.mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const Eigen::VectorXd& w = eb.w;
        Eigen::MatrixXd B;
        const std::vector<int>* rd = nullptr;
        const std::vector<int>* cd = nullptr;
        switch (id) {
        case FormId::mass0:
            B = wprod(eb.n0, w, eb.n0);
            rd = cd = &eb.dofs0;
            break;
        case FormId::mass1:
            B = wprod(eb.ux, w, eb.ux) + wprod(eb.uy, w, eb.uy);
            rd = cd = &eb.dofs1;
            break;
        case FormId::mass2:
            B = wprod(eb.p, w, eb.p);
            rd = cd = &eb.dofs2;
            break;
        case FormId::rot_coupling:
            B = wprod(eb.ux, w, eb.n0_dy) - wprod(eb.uy, w, eb.n0_dx);
            rd = &eb.dofs1;
            cd = &eb.dofs0;
            break;
        case FormId::pressure_div:
            B = wprod(eb.div, w, eb.p);
            rd = &eb.dofs1;
            cd = &eb.dofs2;
            break;
        case FormId::convection: {
            Eigen::VectorXd ax(eb.nq());
            Eigen::VectorXd ay(eb.nq());
            for (int q = 0; q < eb.nq(); ++q) {
                const Eigen::Vector2d a = advecting(eb.x(q), eb.y(q));
                ax(q) = a.x();
                ay(q) = a.y();
            }
            B = wprod(eb.ux, -w.cwiseProduct(ay), eb.n0) + wprod(eb.uy, w.cwiseProduct(ax), eb.n0);
            rd = &eb.dofs1;
            cd = &eb.dofs0;
            break;
        }
        }
        for (int j = 0; j < B.cols(); ++j) {
            for (int i = 0; i < B.rows(); ++i) {
                trip.emplace_back((*rd)[i], (*cd)[j], B(i, j));
            }
        }
    }
    Eigen::SparseMatrix<double> m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void parallel_for_elements(int n_elements, const std::function<void(int)>& fn)
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(std::max(1, n_elements / 4))));
    if (n_threads <= 1) {
        for (int e = 0; e < n_elements; ++e) {
            fn(e);
        }
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    int err_element = -1;
    std::exception_ptr err;
    auto worker = [&]() {
        for (;;) {
            const int e = next.fetch_add(1);
            if (e >= n_elements) {
                return;
            }
            try {
                fn(e);
            }
            catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (err_element < 0 || e < err_element) {
                    err_element = e;
                    err = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (err) {
        std::rethrow_exception(err);
    }
}

}   // namespace vmsns
