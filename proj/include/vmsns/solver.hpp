#pragma once

#include "vmsns/assembly.hpp"
#include "vmsns/boundary.hpp"
#include "vmsns/bubbles.hpp"
#include "vmsns/derham.hpp"
#include "vmsns/linear_solve.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmsns {

enum class StabMode { none, full_cn, semi_cn };

const char* to_string(StabMode m);
/// Accepts "none", "full-cn", "semi-cn"; throws std::invalid_argument otherwise.
StabMode stab_mode_from_string(const std::string& s);

struct NSConfig {
    double re_inv = 0.0;   // 1/Re; zero for inviscid flow
    double dt = 0.0;
    double t_final = 0.0;
    double picard_tol = 1e-10;
    int picard_max = 50;
    StabMode stab = StabMode::full_cn;
    double c1 = -1.0;   // negative: max(kx, ky)^2
    double c2 = -1.0;   // negative: max(k'x, k'y)^4
    VectorField forcing;   // empty: f = 0
    BoundaryData boundary;
    double tau_inv_override = -1.0;   // non-negative: use this constant tau_M^-1
};

/// Coarse and fine coefficients at one time level.
struct State {
    double t = 0.0;
    Eigen::VectorXd w;
    Eigen::VectorXd u;
    Eigen::VectorXd p;
    double lambda = 0.0;
    std::vector<Eigen::VectorXd> fine;   // per element [omega' | u' | p'], empty without fine scales
};

/// Spaces, bubbles, quadrature tables and the cached sparse factorization of
/// one discretization.
class Discretization {
public:
    /// `fine_degree` of 0 builds no bubbles (unstabilized runs only).
    Discretization(const Mesh2D& mesh, int k, int fine_degree, const BoundarySpec& bc, int n_gauss = 0);
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;

    const DeRhamSpaces2D& spaces() const { return spaces_; }
    const BubbleComplex* bubbles() const { return bubbles_ ? &*bubbles_ : nullptr; }
    const ElementTables& tables() const { return *tables_; }
    const CoarseLayout& layout() const { return layout_; }
    const Eigen::VectorXd& pressure_integrals() const { return p_int_; }
    const std::vector<char>& constrained() const { return constrained_; }
    int k() const { return k_; }
    int fine_degree() const { return kf_; }
    int n_fine_local() const;
    LinearSolver& linear_solver() { return solver_; }

    State zero_state(bool with_fine) const;

    double default_c1() const { return static_cast<double>(k_ * k_); }
    double default_c2() const { return std::pow(static_cast<double>(kf_), 4); }

private:
    int k_;
    int kf_;
    DeRhamSpaces2D spaces_;
    std::optional<BubbleComplex> bubbles_;
    std::unique_ptr<ElementTables> tables_;
    CoarseLayout layout_;
    Eigen::VectorXd p_int_;
    std::vector<char> constrained_;
    LinearSolver solver_;
};

/// tau_M^-1 = sqrt(C1 |a|^2 / h^2 + C2 Re^-2 / (4 h^4)).
double tau_m_inverse(double speed_sq, double h, double re_inv, double c1, double c2);
Eigen::VectorXd tau_m_inverse(const Eigen::VectorXd& ax, const Eigen::VectorXd& ay, double h, double re_inv, double c1,
                              double c2);

/// Largest dt <= min(h^((k+1)/2), h^2 Re / 4) that divides t_final evenly.
double auto_time_step(double h, int k, double re_inv, double t_final);

/// Frozen data of one linearized solve, sampled element by element.
using FieldBuilder = std::function<ElementFields(const ElementBasis&)>;

struct LinearizedProblem {
    KernelCoefficients coeffs;
    FieldBuilder fields;
    bool with_fine = true;
    const BoundaryData* boundary = nullptr;
    double t_bc = 0.0;
};

/// Assemble, condense (or keep the fine DOFs when `monolithic`), constrain,
/// solve and recover. Returns coarse and fine coefficients in a State.
State solve_linearized(Discretization& disc, const LinearizedProblem& prob, bool monolithic = false);

/// Fields of a state at the quadrature points of one element.
struct SampledState {
    Eigen::VectorXd w, ux, uy;
    Eigen::VectorXd wf, ufx, ufy;   // fine parts (zero when absent)
};
SampledState sample_state(const ElementBasis& eb, const State& s);

class PicardError : public std::runtime_error {
public:
    PicardError(const std::string& what, State last, std::vector<double> history)
        : std::runtime_error(what), last_(std::move(last)), history_(std::move(history))
    {
    }
    const State& last_iterate() const { return last_; }
    const std::vector<double>& history() const { return history_; }

private:
    State last_;
    std::vector<double> history_;
};

/// One Picard iteration of the midpoint system. `iterate` holds midpoint
/// values; for the steady problem pass `steady = true` and `previous` is ignored.
State picard_step(Discretization& disc, const State& previous, const State& iterate, const NSConfig& cfg,
                  bool steady = false, bool monolithic = false);

struct StepResult {
    State next;
    State mid;
    int iterations = 0;
    std::vector<double> history;
};

/// Crank-Nicolson step with Picard iterations on the midpoint unknowns.
/// Throws PicardError on non-convergence.
StepResult advance_timestep(Discretization& disc, const State& state, const NSConfig& cfg);

struct SteadyResult {
    State state;
    int iterations = 0;
    std::vector<double> history;
};

SteadyResult solve_steady(Discretization& disc, const NSConfig& cfg, const State* initial = nullptr);

/// Relative l2 norm of the stacked difference of the vorticity and velocity
/// unknowns (coarse and fine). Pressures and the mean multiplier are left out.
double relative_update(const Discretization& disc, const State& a, const State& b);

/// L2 projection of a velocity field onto V1 subject to div u = projection of
/// div u0 (zero for solenoidal u0), followed by omega from (omega, tau) = (u, rot tau).
State initial_state(Discretization& disc, const VectorField& u0, bool with_fine, double t = 0.0);

/// Kinetic energies of a state.
struct KineticEnergy {
    double coarse = 0.0;
    double fine = 0.0;
    double total = 0.0;
};
KineticEnergy kinetic_energy(const Discretization& disc, const State& s);

struct EnergyLedger {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double dissipation_tau = 0.0;
};
EnergyLedger energy_report(const Discretization& disc, const State& n, const State& n1, const StepResult& step,
                           const NSConfig& cfg);

/// Maximum |div u^h| and |div u'| over all quadrature points.
struct DivergenceReport {
    double coarse = 0.0;
    double fine = 0.0;
    double u_inf = 0.0;
};
DivergenceReport divergence_report(const Discretization& disc, const State& s);

// Oseen validation mode

struct OseenParams {
    double sigma = 1.0;
    double nu = 1.0;
    Eigen::VectorXd beta_h;   // V1 coefficients; empty means zero
    VectorField beta_fine;    // optional fine part
    VectorField forcing;
    double c1 = -1.0;
    double c2 = -1.0;
};

/// tau_M^-1 for the Oseen problem, with |beta^h| and nu in place of |u| and 1/Re.
State solve_oseen(Discretization& disc, const OseenParams& params);

struct AssumptionReport {
    double beta_nu_sigma = 0.0;   // max(|beta|^2, |beta^h|^2)_inf / (nu sigma), bound 1/6
    double tau_sigma = 0.0;       // max tau^-1 / sigma, bound 1
    double beta_h_nu = 0.0;       // |beta^h|_inf h / nu, bound 1/24
    double beta_tau = 0.0;        // max |beta^h| / (h tau^-1), bound 1
    double h = 0.0;
    double margin[4] = {0, 0, 0, 0};
    bool satisfied[4] = {false, false, false, false};
    std::optional<double> inf_sup;
};

/// Assemble the report from sampled quantities.
AssumptionReport assumption_margins(double beta_total_inf, double beta_h_inf, double nu, double sigma, double h,
                                    double tau_inv_max, double beta_tau_max);

/// Evaluate the four conditions at quadrature points; optionally estimate the
/// inf-sup constant (meshes up to 8x8).
AssumptionReport check_assumptions(const Discretization& disc, const OseenParams& params, bool with_inf_sup = false);

/// sqrt of the smallest nonzero eigenvalue of B M^-1 B^T q = lambda M_q q with
/// M the H(div) Gram matrix over the free velocity DOFs.
double inf_sup_estimate(const Discretization& disc);

/// Exact Oseen solution; u must be solenoidal.
struct ExactFields {
    VectorField u;
    ScalarField w;
    ScalarField p;
    VectorField rot_w;   // (dw/dy, -dw/dx)
};
/// Largest residual of the coarse Oseen equations over the free test
/// functions at the exact solution with zero fine scales.
double oseen_consistency_residual(const Discretization& disc, const OseenParams& params, const ExactFields& exact,
                                  int n_gauss = 16);

/// L2 projection of a vector field onto V1 (no constraint).
Eigen::VectorXd project_v1(const Discretization& disc, const VectorField& f, double t = 0.0);

}   // namespace vmsns
