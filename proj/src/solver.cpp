#include "vmsns/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vmsns {

const char* to_string(StabMode m)
{
    switch (m) {
    case StabMode::none: return "none";
    case StabMode::full_cn: return "full-cn";
    case StabMode::semi_cn: return "semi-cn";
    }
    return "?";
}

StabMode stab_mode_from_string(const std::string& s)
{
    if (s == "none") {
        return StabMode::none;
    }
    if (s == "full-cn" || s == "full_cn") {
        return StabMode::full_cn;
    }
    if (s == "semi-cn" || s == "semi_cn") {
        return StabMode::semi_cn;
    }
    throw std::invalid_argument("unknown stabilization mode '" + s + "' (expected none, full-cn or semi-cn)");
}

Discretization::Discretization(const Mesh2D& mesh, int k, int fine_degree, const BoundarySpec& bc, int n_gauss)
    : k_(k), kf_(fine_degree), spaces_(build_complex(mesh, k, k, bc))
{
    if (fine_degree > 0) {
        bubbles_.emplace(build_bubble_complex(fine_degree, fine_degree));
    }
    const int ng = n_gauss > 0 ? n_gauss : default_quadrature_points(k, k, fine_degree, fine_degree);
    tables_ = std::make_unique<ElementTables>(spaces_, bubbles(), ng);
    layout_ = coarse_layout(spaces_);
    p_int_ = vmsns::pressure_integrals(*tables_);
    constrained_ = constrained_dofs(spaces_, layout_);
}

int Discretization::n_fine_local() const { return bubbles_ ? bubbles_->dim() : 0; }

State Discretization::zero_state(bool with_fine) const
{
    State s;
    s.w.setZero(spaces_.dim0());
    s.u.setZero(spaces_.dim1());
    s.p.setZero(spaces_.dim2());
    if (with_fine && bubbles_) {
        s.fine.assign(spaces_.mesh.n_elements(), Eigen::VectorXd::Zero(n_fine_local()));
    }
    return s;
}

double tau_m_inverse(double speed_sq, double h, double re_inv, double c1, double c2)
{
    const double h2 = h * h;
    return std::sqrt(c1 * speed_sq / h2 + c2 * re_inv * re_inv / (4.0 * h2 * h2));
}

Eigen::VectorXd tau_m_inverse(const Eigen::VectorXd& ax, const Eigen::VectorXd& ay, double h, double re_inv, double c1,
                              double c2)
{
    Eigen::VectorXd t(ax.size());
    for (Eigen::Index q = 0; q < ax.size(); ++q) {
        t(q) = tau_m_inverse(ax(q) * ax(q) + ay(q) * ay(q), h, re_inv, c1, c2);
    }
    return t;
}

double auto_time_step(double h, int k, double re_inv, double t_final)
{
    double bound = std::pow(h, 0.5 * (k + 1));
    if (re_inv > 0.0) {
        bound = std::min(bound, h * h / (4.0 * re_inv));
    }
    return t_final / std::ceil(t_final / bound - 1e-12);
}

namespace {

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx)
{
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    }
    return out;
}

std::vector<BlockInfo> free_blocks(const CoarseLayout& L, const std::vector<int>& free_to_full, int n_full)
{
    const int bounds[] = {L.off_w(), L.off_u(), L.off_p(), L.off_lambda(), L.size(), n_full};
    const char* names[] = {"vorticity", "velocity", "pressure", "pressure mean multiplier", "fine scales"};
    std::vector<BlockInfo> out;
    for (int b = 0; b < 5; ++b) {
        const auto lo = std::lower_bound(free_to_full.begin(), free_to_full.end(), bounds[b]);
        const auto hi = std::lower_bound(free_to_full.begin(), free_to_full.end(), bounds[b + 1]);
        if (hi > lo) {
            out.push_back({names[b], static_cast<int>(lo - free_to_full.begin()),
                           static_cast<int>(hi - free_to_full.begin())});
        }
    }
    return out;
}

void sample_vector(const VectorField& f, const ElementBasis& eb, double t, Eigen::VectorXd& fx, Eigen::VectorXd& fy)
{
    fx.setZero(eb.nq());
    fy.setZero(eb.nq());
    if (!f) {
        return;
    }
    for (int q = 0; q < eb.nq(); ++q) {
        const Eigen::Vector2d v = f(eb.x(q), eb.y(q), t);
        fx(q) = v.x();
        fy(q) = v.y();
    }
}

}   // namespace

SampledState sample_state(const ElementBasis& eb, const State& s)
{
    SampledState r;
    const Eigen::VectorXd wl = gather(s.w, eb.dofs0);
    const Eigen::VectorXd ul = gather(s.u, eb.dofs1);
    r.w = eb.n0 * wl;
    r.ux = eb.ux * ul;
    r.uy = eb.uy * ul;
    r.wf.setZero(eb.nq());
    r.ufx.setZero(eb.nq());
    r.ufy.setZero(eb.nq());
    if (eb.has_fine && static_cast<std::size_t>(eb.element) < s.fine.size() && s.fine[eb.element].size() == eb.nf()) {
        const Eigen::VectorXd& f = s.fine[eb.element];
        const Eigen::Index m0 = eb.fine.w0.cols();
        const Eigen::Index m1 = eb.fine.u_x.cols();
        r.wf = eb.fine.w0 * f.segment(0, m0);
        r.ufx = eb.fine.u_x * f.segment(m0, m1);
        r.ufy = eb.fine.u_y * f.segment(m0, m1);
    }
    return r;
}

State solve_linearized(Discretization& disc, const LinearizedProblem& prob, bool monolithic)
{
    const DeRhamSpaces2D& sp = disc.spaces();
    const ElementTables& tables = disc.tables();
    const CoarseLayout& L = disc.layout();
    const int ne = sp.mesh.n_elements();
    const bool fine = prob.with_fine && disc.bubbles() != nullptr;
    const int nfl = fine ? disc.n_fine_local() : 0;

    std::vector<std::vector<int>> dofs(ne);
    std::vector<Eigen::MatrixXd> blocks(ne);
    std::vector<Eigen::VectorXd> rhs(ne);
    std::vector<CondensedElement> cond(fine && !monolithic ? ne : 0);

    parallel_for_elements(ne, [&](int e) {
        const ElementBasis eb = tables.basis(e);
        const ElementFields f = prob.fields(eb);
        ElementSystem sys = element_system(eb, prob.coeffs, f, fine);
        dofs[e] = element_coarse_dofs(eb, L);
        if (!fine) {
            blocks[e] = std::move(sys.K);
            rhs[e] = std::move(sys.b);
        }
        else if (monolithic) {
            for (int i = 0; i < sys.nf; ++i) {
                dofs[e].push_back(L.size() + e * nfl + i);
            }
            blocks[e] = std::move(sys.K);
            rhs[e] = std::move(sys.b);
        }
        else {
            cond[e] = condense_element(split_fine_block(sys, e));
            blocks[e] = sys.K.topLeftCorner(sys.nc, sys.nc) + cond[e].schur;
            rhs[e] = sys.b.head(sys.nc) + cond[e].rhs;
        }
    });

    const int n_total = L.size() + (fine && monolithic ? ne * nfl : 0);
    SparseSystem system = scatter(L, n_total, dofs, blocks, rhs);
    static const BoundaryData no_data{};
    const BoundaryData& data = prob.boundary ? *prob.boundary : no_data;
    system.b.head(L.size()) += boundary_load(sp, data, prob.t_bc, L);
    if (L.multiplier) {
        add_mean_multiplier(system, disc.pressure_integrals());
    }

    std::vector<char> mask = disc.constrained();
    mask.resize(n_total, 0);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(n_total);
    values.head(L.size()) = essential_values(sp, data, prob.t_bc, L);

    const ConstrainedSystem cs = apply_bc(system, mask, values);
    const Eigen::VectorXd xf = disc.linear_solver().solve(cs.A, cs.b, free_blocks(L, cs.free_to_full, n_total));
    const Eigen::VectorXd x = cs.expand(xf);

    State out;
    out.w = x.segment(L.off_w(), L.n0);
    out.u = x.segment(L.off_u(), L.n1);
    out.p = x.segment(L.off_p(), L.n2);
    out.lambda = L.multiplier ? x(L.off_lambda()) : 0.0;
    if (fine) {
        out.fine.resize(ne);
        for (int e = 0; e < ne; ++e) {
            if (monolithic) {
                out.fine[e] = x.segment(L.size() + e * nfl, nfl);
            }
            else {
                const Eigen::VectorXd xc = gather(x, std::vector<int>(dofs[e].begin(), dofs[e].end()));
                out.fine[e] = cond[e].recover(xc);
            }
        }
    }
    return out;
}

double relative_update(const Discretization& disc, const State& a, const State& b)
{
    // pressures only pick up the roundoff of the 1/dt-scaled momentum rows
    const Eigen::Index nk = disc.bubbles() ? disc.bubbles()->dim0() + disc.bubbles()->dim1() : 0;
    double num = (a.w - b.w).squaredNorm() + (a.u - b.u).squaredNorm();
    double den = a.w.squaredNorm() + a.u.squaredNorm();
    const std::size_t nf = std::max(a.fine.size(), b.fine.size());
    for (std::size_t e = 0; e < nf; ++e) {
        const bool ha = e < a.fine.size() && a.fine[e].size() >= nk;
        const bool hb = e < b.fine.size() && b.fine[e].size() >= nk;
        if (ha) {
            den += a.fine[e].head(nk).squaredNorm();
        }
        if (ha && hb) {
            num += (a.fine[e].head(nk) - b.fine[e].head(nk)).squaredNorm();
        }
        else if (ha) {
            num += a.fine[e].head(nk).squaredNorm();
        }
        else if (hb) {
            num += b.fine[e].head(nk).squaredNorm();
        }
    }
    if (num == 0.0) {
        return 0.0;
    }
    return den > 0.0 ? std::sqrt(num / den) : std::numeric_limits<double>::infinity();
}

namespace {

struct StepContext {
    double c1;
    double c2;
    double h;
};

StepContext context(const Discretization& disc, const NSConfig& cfg)
{
    return {cfg.c1 >= 0.0 ? cfg.c1 : disc.default_c1(), cfg.c2 >= 0.0 ? cfg.c2 : disc.default_c2(),
            disc.spaces().mesh.h()};
}

Eigen::VectorXd tau_field(const SampledState& s, const StepContext& ctx, const NSConfig& cfg)
{
    if (cfg.tau_inv_override >= 0.0) {
        return Eigen::VectorXd::Constant(s.ux.size(), cfg.tau_inv_override);
    }
    return tau_m_inverse(s.ux, s.uy, ctx.h, cfg.re_inv, ctx.c1, ctx.c2);
}

}   // namespace

State picard_step(Discretization& disc, const State& previous, const State& iterate, const NSConfig& cfg, bool steady,
                  bool monolithic)
{
    const bool fine = cfg.stab != StabMode::none && disc.bubbles() != nullptr;
    const StepContext ctx = context(disc, cfg);
    if (!steady && !(cfg.dt > 0.0)) {
        throw std::invalid_argument("picard_step: time step must be positive");
    }
    const double mass = steady ? 0.0 : 2.0 / cfg.dt;
    const double t_eval = steady ? previous.t : previous.t + 0.5 * cfg.dt;

    LinearizedProblem prob;
    prob.coeffs.mass = mass;
    prob.coeffs.conv = 1.0;
    prob.coeffs.visc = cfg.re_inv;
    prob.coeffs.visc_fine = 0.5 * cfg.re_inv;
    prob.coeffs.vort_coarse = 1.0;
    prob.coeffs.vort_fine = 1.0;
    prob.coeffs.fine_convection = true;
    prob.with_fine = fine;
    prob.boundary = &cfg.boundary;
    prob.t_bc = t_eval;
    prob.fields = [&](const ElementBasis& eb) {
        const SampledState it = sample_state(eb, iterate);
        ElementFields f = ElementFields::zeros(eb.nq());
        f.a1x = it.ux + it.ufx;
        f.a1y = it.uy + it.ufy;
        f.a2x = it.ux;
        f.a2y = it.uy;
        f.a3x = it.ux;
        f.a3y = it.uy;
        sample_vector(cfg.forcing, eb, t_eval, f.load_x, f.load_y);
        if (!steady) {
            const SampledState pr = sample_state(eb, previous);
            f.load_x += mass * (pr.ux + pr.ufx);
            f.load_y += mass * (pr.uy + pr.ufy);
        }
        if (fine) {
            if (cfg.stab == StabMode::semi_cn && !steady) {
                const SampledState pr = sample_state(eb, previous);
                f.wbar = pr.w;
                f.tau_inv = tau_field(pr, ctx, cfg);
            }
            else {
                f.wbar = it.w;
                f.tau_inv = tau_field(it, ctx, cfg);
            }
        }
        return f;
    };
    State out = solve_linearized(disc, prob, monolithic);
    out.t = t_eval;
    return out;
}

StepResult advance_timestep(Discretization& disc, const State& state, const NSConfig& cfg)
{
    const bool fine = cfg.stab != StabMode::none && disc.bubbles() != nullptr;
    StepResult r;
    State x = state;
    if (fine && x.fine.empty()) {
        x.fine = disc.zero_state(true).fine;
    }
    State start = x;
    for (int m = 1; m <= cfg.picard_max; ++m) {
        State nx = picard_step(disc, start, x, cfg, false);
        const double upd = relative_update(disc, nx, x);
        r.history.push_back(upd);
        x = std::move(nx);
        r.iterations = m;
        if (!std::isfinite(upd)) {
            break;
        }
        if (upd <= cfg.picard_tol) {
            r.mid = x;
            r.next = x;
            r.next.t = state.t + cfg.dt;
            r.next.w = 2.0 * x.w - start.w;
            r.next.u = 2.0 * x.u - start.u;
            for (std::size_t e = 0; e < r.next.fine.size(); ++e) {
                // omega' and u' are extrapolated; p' stays at the midpoint
                const Eigen::Index nwu = disc.bubbles()->dim0() + disc.bubbles()->dim1();
                r.next.fine[e].head(nwu) = 2.0 * x.fine[e].head(nwu) - start.fine[e].head(nwu);
            }
            return r;
        }
    }
    std::ostringstream os;
    os << "Picard iteration did not converge at t = " << state.t << " after " << r.iterations
       << " iterations (last relative update " << (r.history.empty() ? 0.0 : r.history.back()) << ")";
    throw PicardError(os.str(), x, r.history);
}

namespace {

Eigen::VectorXd pack(const State& s)
{
    Eigen::Index n = s.w.size() + s.u.size() + s.p.size() + 1;
    for (const auto& f : s.fine) {
        n += f.size();
    }
    Eigen::VectorXd v(n);
    Eigen::Index o = 0;
    for (const Eigen::VectorXd* b : {&s.w, &s.u, &s.p}) {
        v.segment(o, b->size()) = *b;
        o += b->size();
    }
    v(o++) = s.lambda;
    for (const auto& f : s.fine) {
        v.segment(o, f.size()) = f;
        o += f.size();
    }
    return v;
}

void unpack(const Eigen::VectorXd& v, State& s)
{
    Eigen::Index o = 0;
    for (Eigen::VectorXd* b : {&s.w, &s.u, &s.p}) {
        *b = v.segment(o, b->size());
        o += b->size();
    }
    s.lambda = v(o++);
    for (auto& f : s.fine) {
        f = v.segment(o, f.size());
        o += f.size();
    }
}

/// 1 on vorticity and velocity entries of a packed state, 0 on pressures.
Eigen::VectorXd kinematic_mask(const Discretization& disc, const State& s)
{
    Eigen::VectorXd m = Eigen::VectorXd::Zero(pack(s).size());
    m.head(s.w.size() + s.u.size()).setOnes();
    const Eigen::Index nk = disc.bubbles() ? disc.bubbles()->dim0() + disc.bubbles()->dim1() : 0;
    Eigen::Index o = s.w.size() + s.u.size() + s.p.size() + 1;
    for (const auto& f : s.fine) {
        m.segment(o, std::min(nk, f.size())).setOnes();
        o += f.size();
    }
    return m;
}

}   // namespace

SteadyResult solve_steady(Discretization& disc, const NSConfig& cfg, const State* initial)
{
    const bool fine = cfg.stab != StabMode::none && disc.bubbles() != nullptr;
    SteadyResult r;
    State x = initial ? *initial : disc.zero_state(fine);
    if (fine && x.fine.empty()) {
        x.fine = disc.zero_state(true).fine;
    }
    const State ref = x;
    const Eigen::VectorXd mask = kinematic_mask(disc, x);
    // Anderson mixing over the last few Picard maps
    constexpr int depth = 5;
    std::vector<Eigen::VectorXd> gs, fs;
    for (int m = 1; m <= cfg.picard_max; ++m) {
        State nx = picard_step(disc, ref, x, cfg, true);
        const double upd = relative_update(disc, nx, x);
        r.history.push_back(upd);
        r.iterations = m;
        if (!std::isfinite(upd)) {
            x = std::move(nx);
            break;
        }
        if (upd <= cfg.picard_tol) {
            r.state = std::move(nx);
            return r;
        }
        const Eigen::VectorXd g = pack(nx);
        gs.push_back(g);
        fs.push_back(mask.cwiseProduct(g - pack(x)));
        if (gs.size() > depth + 1) {
            gs.erase(gs.begin());
            fs.erase(fs.begin());
        }
        Eigen::VectorXd next = g;
        const int nh = static_cast<int>(gs.size()) - 1;
        if (nh > 0) {
            Eigen::MatrixXd df(g.size(), nh), dg(g.size(), nh);
            for (int i = 0; i < nh; ++i) {
                df.col(i) = fs[i + 1] - fs[i];
                dg.col(i) = gs[i + 1] - gs[i];
            }
            const Eigen::VectorXd gamma = df.colPivHouseholderQr().solve(fs.back());
            if (gamma.allFinite()) {
                next -= dg * gamma;
            }
        }
        unpack(next, x);
    }
    std::ostringstream os;
    os << "steady Picard iteration did not converge after " << r.iterations << " iterations (last relative update "
       << (r.history.empty() ? 0.0 : r.history.back()) << ")";
    throw PicardError(os.str(), x, r.history);
}

State initial_state(Discretization& disc, const VectorField& u0, bool with_fine, double t)
{
    LinearizedProblem prob;
    prob.coeffs.mass = 1.0;
    prob.coeffs.conv = 0.0;
    prob.coeffs.visc = 0.0;
    prob.coeffs.vort_coarse = 1.0;
    prob.with_fine = false;
    BoundaryData data;
    data.spec = disc.spaces().bc;
    data.velocity = u0;
    prob.boundary = &data;
    prob.t_bc = t;
    prob.fields = [&](const ElementBasis& eb) {
        ElementFields f = ElementFields::zeros(eb.nq());
        sample_vector(u0, eb, t, f.load_x, f.load_y);
        return f;
    };
    State s = solve_linearized(disc, prob);
    s.t = t;
    s.p.setZero();
    s.lambda = 0.0;
    if (with_fine && disc.bubbles()) {
        s.fine = disc.zero_state(true).fine;
    }
    return s;
}

KineticEnergy kinetic_energy(const Discretization& disc, const State& s)
{
    KineticEnergy k;
    const ElementTables& tables = disc.tables();
    for (int e = 0; e < disc.spaces().mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const SampledState v = sample_state(eb, s);
        for (int q = 0; q < eb.nq(); ++q) {
            const double cx = v.ux(q);
            const double cy = v.uy(q);
            const double fx = v.ufx(q);
            const double fy = v.ufy(q);
            k.coarse += 0.5 * eb.w(q) * (cx * cx + cy * cy);
            k.fine += 0.5 * eb.w(q) * (fx * fx + fy * fy);
            k.total += 0.5 * eb.w(q) * ((cx + fx) * (cx + fx) + (cy + fy) * (cy + fy));
        }
    }
    return k;
}

EnergyLedger energy_report(const Discretization& disc, const State& n, const State& n1, const StepResult& step,
                           const NSConfig& cfg)
{
    EnergyLedger led;
    led.lhs = (kinetic_energy(disc, n1).total - kinetic_energy(disc, n).total) / cfg.dt;
    const StepContext ctx = context(disc, cfg);
    const double t_mid = n.t + 0.5 * cfg.dt;
    const ElementTables& tables = disc.tables();
    double work = 0.0;
    double visc = 0.0;
    double tau = 0.0;
    for (int e = 0; e < disc.spaces().mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const SampledState m = sample_state(eb, step.mid);
        Eigen::VectorXd fx;
        Eigen::VectorXd fy;
        sample_vector(cfg.forcing, eb, t_mid, fx, fy);
        Eigen::VectorXd ti = Eigen::VectorXd::Zero(eb.nq());
        if (!step.mid.fine.empty()) {
            ti = cfg.stab == StabMode::semi_cn ? tau_field(sample_state(eb, n), ctx, cfg) : tau_field(m, ctx, cfg);
        }
        for (int q = 0; q < eb.nq(); ++q) {
            const double w = eb.w(q);
            work += w * (fx(q) * (m.ux(q) + m.ufx(q)) + fy(q) * (m.uy(q) + m.ufy(q)));
            visc += w * cfg.re_inv * (m.w(q) * m.w(q) + 0.5 * m.wf(q) * m.wf(q));
            tau += w * ti(q) * (m.ufx(q) * m.ufx(q) + m.ufy(q) * m.ufy(q));
        }
    }
    led.dissipation_tau = tau;
    led.rhs = work - visc - tau;
    led.residual = led.lhs - led.rhs;
    return led;
}

DivergenceReport divergence_report(const Discretization& disc, const State& s)
{
    DivergenceReport r;
    const ElementTables& tables = disc.tables();
    for (int e = 0; e < disc.spaces().mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const Eigen::VectorXd ul = gather(s.u, eb.dofs1);
        r.coarse = std::max(r.coarse, (eb.div * ul).cwiseAbs().maxCoeff());
        const SampledState v = sample_state(eb, s);
        for (int q = 0; q < eb.nq(); ++q) {
            r.u_inf = std::max(r.u_inf, std::hypot(v.ux(q), v.uy(q)));
        }
        if (eb.has_fine && static_cast<std::size_t>(e) < s.fine.size() && s.fine[e].size() == eb.nf()) {
            const Eigen::Index m0 = eb.fine.w0.cols();
            const Eigen::Index m1 = eb.fine.u_x.cols();
            r.fine = std::max(r.fine, (eb.fine.div * s.fine[e].segment(m0, m1)).cwiseAbs().maxCoeff());
        }
    }
    return r;
}

namespace {

struct OseenSample {
    Eigen::VectorXd bhx, bhy;   // beta^h
    Eigen::VectorXd bx, by;     // beta^h + beta'
};

OseenSample sample_beta(const ElementBasis& eb, const OseenParams& op)
{
    OseenSample s;
    s.bhx.setZero(eb.nq());
    s.bhy.setZero(eb.nq());
    if (op.beta_h.size() > 0) {
        const Eigen::VectorXd bl = gather(op.beta_h, eb.dofs1);
        s.bhx = eb.ux * bl;
        s.bhy = eb.uy * bl;
    }
    Eigen::VectorXd fx;
    Eigen::VectorXd fy;
    sample_vector(op.beta_fine, eb, 0.0, fx, fy);
    s.bx = s.bhx + fx;
    s.by = s.bhy + fy;
    return s;
}

}   // namespace

State solve_oseen(Discretization& disc, const OseenParams& op)
{
    if (!(op.nu > 0.0) || !(op.sigma > 0.0)) {
        throw std::invalid_argument("solve_oseen: nu and sigma must be positive");
    }
    if (op.beta_h.size() != 0 && op.beta_h.size() != disc.spaces().dim1()) {
        throw std::invalid_argument("solve_oseen: beta^h has the wrong length");
    }
    const double c1 = op.c1 >= 0.0 ? op.c1 : disc.default_c1();
    const double c2 = op.c2 >= 0.0 ? op.c2 : disc.default_c2();
    const double h = disc.spaces().mesh.h();
    const double sn = std::sqrt(op.nu);

    LinearizedProblem prob;
    prob.coeffs.mass = op.sigma;
    prob.coeffs.conv = 1.0 / sn;
    prob.coeffs.visc = sn;
    prob.coeffs.visc_fine = std::sqrt(0.5 * op.nu);
    prob.coeffs.vort_coarse = sn;
    prob.coeffs.vort_fine = std::sqrt(0.5 * op.nu);
    prob.coeffs.fine_convection = false;
    prob.with_fine = disc.bubbles() != nullptr;
    prob.fields = [&](const ElementBasis& eb) {
        const OseenSample b = sample_beta(eb, op);
        ElementFields f = ElementFields::zeros(eb.nq());
        f.a1x = b.bx;
        f.a1y = b.by;
        f.a2x = b.bhx;
        f.a2y = b.bhy;
        f.a3x = b.bx;
        f.a3y = b.by;
        f.tau_inv = tau_m_inverse(b.bhx, b.bhy, h, op.nu, c1, c2);
        sample_vector(op.forcing, eb, 0.0, f.load_x, f.load_y);
        return f;
    };
    return solve_linearized(disc, prob);
}

AssumptionReport assumption_margins(double beta_total_inf, double beta_h_inf, double nu, double sigma, double h,
                                    double tau_inv_max, double beta_tau_max)
{
    AssumptionReport r;
    r.h = h;
    const double bmax = std::max(beta_total_inf, beta_h_inf);
    r.beta_nu_sigma = bmax * bmax / (nu * sigma);
    r.tau_sigma = tau_inv_max / sigma;
    r.beta_h_nu = beta_h_inf * h / nu;
    r.beta_tau = beta_tau_max;
    r.margin[0] = 1.0 / 6.0 - r.beta_nu_sigma;
    r.margin[1] = 1.0 - r.tau_sigma;
    r.margin[2] = 1.0 / 24.0 - r.beta_h_nu;
    r.margin[3] = 1.0 - r.beta_tau;
    for (int i = 0; i < 4; ++i) {
        r.satisfied[i] = r.margin[i] >= -1e-14;
    }
    return r;
}

AssumptionReport check_assumptions(const Discretization& disc, const OseenParams& op, bool with_inf_sup)
{
    const double c1 = op.c1 >= 0.0 ? op.c1 : disc.default_c1();
    const double c2 = op.c2 >= 0.0 ? op.c2 : disc.default_c2();
    const double h = disc.spaces().mesh.h();
    double bt = 0.0;
    double bh = 0.0;
    double tmax = 0.0;
    double ratio = 0.0;
    const ElementTables& tables = disc.tables();
    for (int e = 0; e < disc.spaces().mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const OseenSample b = sample_beta(eb, op);
        const Eigen::VectorXd ti = tau_m_inverse(b.bhx, b.bhy, h, op.nu, c1, c2);
        for (int q = 0; q < eb.nq(); ++q) {
            const double nb = std::hypot(b.bhx(q), b.bhy(q));
            bt = std::max(bt, std::hypot(b.bx(q), b.by(q)));
            bh = std::max(bh, nb);
            tmax = std::max(tmax, ti(q));
            ratio = std::max(ratio, nb / (h * ti(q)));
        }
    }
    AssumptionReport r = assumption_margins(bt, bh, op.nu, op.sigma, h, tmax, ratio);
    if (with_inf_sup) {
        r.inf_sup = inf_sup_estimate(disc);
    }
    return r;
}

double inf_sup_estimate(const Discretization& disc)
{
    const DeRhamSpaces2D& sp = disc.spaces();
    const ElementTables& tables = disc.tables();
    const Eigen::MatrixXd M1 = Eigen::MatrixXd(assemble_form(FormId::mass1, tables));
    const Eigen::MatrixXd M2 = Eigen::MatrixXd(assemble_form(FormId::mass2, tables));
    const Eigen::MatrixXd D = Eigen::MatrixXd(sp.div);
    const Eigen::MatrixXd Bt = Eigen::MatrixXd(assemble_form(FormId::pressure_div, tables));   // dim1 x dim2

    std::vector<int> free;
    for (int i = 0; i < sp.dim1(); ++i) {
        if (!sp.constrained1[i]) {
            free.push_back(i);
        }
    }
    const int nf = static_cast<int>(free.size());
    const Eigen::MatrixXd G = M1 + D.transpose() * M2 * D;
    Eigen::MatrixXd Gf(nf, nf);
    Eigen::MatrixXd Bf(sp.dim2(), nf);
    for (int j = 0; j < nf; ++j) {
        for (int i = 0; i < nf; ++i) {
            Gf(i, j) = G(free[i], free[j]);
        }
        Bf.col(j) = Bt.row(free[j]).transpose();
    }
    const Eigen::MatrixXd S = Bf * Gf.ldlt().solve(Bf.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), M2);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("inf_sup_estimate: eigenvalue computation failed");
    }
    const Eigen::VectorXd ev = es.eigenvalues();
    const int idx = sp.mean_zero_pressure ? 1 : 0;
    return std::sqrt(std::max(0.0, ev(std::min<Eigen::Index>(idx, ev.size() - 1))));
}

double oseen_consistency_residual(const Discretization& disc, const OseenParams& op, const ExactFields& ex, int n_gauss)
{
    const DeRhamSpaces2D& sp = disc.spaces();
    const CoarseLayout& L = disc.layout();
    const ElementTables tables(sp, nullptr, n_gauss);
    const double sn = std::sqrt(op.nu);
    Eigen::VectorXd res = Eigen::VectorXd::Zero(L.size());
    for (int e = 0; e < sp.mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        const OseenSample b = sample_beta(eb, op);
        const int nq = eb.nq();
        Eigen::VectorXd rx(nq), ry(nq), wv(nq), ux(nq), uy(nq), pv(nq);
        for (int q = 0; q < nq; ++q) {
            const double x = eb.x(q);
            const double y = eb.y(q);
            const Eigen::Vector2d u = ex.u(x, y, 0.0);
            const Eigen::Vector2d rw = ex.rot_w(x, y, 0.0);
            const Eigen::Vector2d f = op.forcing ? op.forcing(x, y, 0.0) : Eigen::Vector2d::Zero();
            const double w = ex.w(x, y, 0.0);
            rx(q) = op.sigma * u.x() - w * b.by(q) / sn + sn * rw.x() - f.x();
            ry(q) = op.sigma * u.y() + w * b.bx(q) / sn + sn * rw.y() - f.y();
            wv(q) = w;
            ux(q) = u.x();
            uy(q) = u.y();
            pv(q) = ex.p(x, y, 0.0);
        }
        const Eigen::VectorXd& W = eb.w;
        const Eigen::VectorXd rm = eb.ux.transpose() * W.cwiseProduct(rx) + eb.uy.transpose() * W.cwiseProduct(ry) -
                                   eb.div.transpose() * W.cwiseProduct(pv);
        const Eigen::VectorXd rv = eb.n0.transpose() * W.cwiseProduct(wv) -
                                   sn * (eb.n0_dy.transpose() * W.cwiseProduct(ux) - eb.n0_dx.transpose() * W.cwiseProduct(uy));
        for (int i = 0; i < eb.n1_local(); ++i) {
            res(L.off_u() + eb.dofs1[i]) += rm(i);
        }
        for (int i = 0; i < eb.n0_local(); ++i) {
            res(L.off_w() + eb.dofs0[i]) += rv(i);
        }
    }
    double m = 0.0;
    for (int i = 0; i < L.off_p(); ++i) {
        if (!disc.constrained()[i]) {
            m = std::max(m, std::abs(res(i)));
        }
    }
    return m;
}

Eigen::VectorXd project_v1(const Discretization& disc, const VectorField& f, double t)
{
    const ElementTables& tables = disc.tables();
    const Eigen::SparseMatrix<double> M = assemble_form(FormId::mass1, tables);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(disc.spaces().dim1());
    for (int e = 0; e < disc.spaces().mesh.n_elements(); ++e) {
        const ElementBasis eb = tables.basis(e);
        Eigen::VectorXd fx;
        Eigen::VectorXd fy;
        sample_vector(f, eb, t, fx, fy);
        const Eigen::VectorXd loc = eb.ux.transpose() * eb.w.cwiseProduct(fx) + eb.uy.transpose() * eb.w.cwiseProduct(fy);
        for (int i = 0; i < eb.n1_local(); ++i) {
            r(eb.dofs1[i]) += loc(i);
        }
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
    if (ldlt.info() != Eigen::Success) {
        throw std::runtime_error("project_v1: mass matrix factorization failed");
    }
    return ldlt.solve(r);
}

}   // namespace vmsns
