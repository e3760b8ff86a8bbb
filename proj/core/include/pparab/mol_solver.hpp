#ifndef PPARAB_MOL_SOLVER_HPP
#define PPARAB_MOL_SOLVER_HPP

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pparab/grid.hpp"
#include "pparab/params.hpp"
#include "pparab/tridiag.hpp"

/// Method-of-lines semi-discretization of u_t = Delta_p u on a uniform 1D
/// grid with Dirichlet data, advanced by adaptive BDF1/BDF2 with damped
/// Newton and step-doubling error control.
namespace pparab::solver {

enum class Scheme { BDF1, BDF2 };

struct IntegratorOptions {
    Scheme scheme = Scheme::BDF2;
    double rtol = 1e-7;
    double atol = 1e-10;
    double dt_init = 1e-8;
    double dt_min = 1e-14;
    double dt_max = 1e-2;
    int newton_max_iter = 12;
    double newton_tol = 1e-10;
};

/// Named initial-data families. amplitude scales every family.
struct InitialData {
    enum class Family { PowerPlus, Barenblatt, Constant, Tabulated };
    Family family = Family::PowerPlus;
    double amplitude = 1.0;
    // PowerPlus: amplitude * (x - origin)_+^exponent; exponent NaN means p/(p-2)
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double origin = 0.0; // also the Barenblatt center
    // Barenblatt: amplitude * U(x - origin, t0) with mass constant C0 (NaN -> q)
    double t0 = 0.015625;
    double C0 = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0; // Constant
    std::vector<double> table;
};

struct ProblemSpec {
    PParams params{4.0, 1};
    Grid grid{};
    double bc_left = 0.0;
    double bc_right = 0.0;
    InitialData initial{};
    double t_end = 0.0;
    IntegratorOptions integrator{};

    void validate() const; // throws std::invalid_argument
};

struct SolveStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long newton_iters_total = 0;
    double min_dt_used = std::numeric_limits<double>::infinity();
    double min_value_seen = 0.0; ///< most negative nodal value (undershoot diagnostic)
};

struct SolveTrace {
    std::vector<GridState> snapshots;
    SolveStats stats;
};

/// Nodal samples of the configured profile, boundary nodes overwritten with
/// the Dirichlet values.
GridState sample_initial_data(const ProblemSpec& spec);

/// Semi-discrete right-hand side of eq. u_t^i = (p-1)|D_i|^{p-2} H_i with
/// central quotients D_i, H_i; boundary rows are zero (frozen Dirichlet).
std::vector<double> rhs(const GridState& state, const PParams& params, const Grid& grid);

/// Exact tridiagonal Jacobian of rhs. At D = 0 the |D|^{p-3} factor is taken
/// as 0 when p < 3 (subgradient convention, see module notes).
Tridiagonal jacobian(const GridState& state, const PParams& params, const Grid& grid);

struct StepResult {
    bool converged = false;
    GridState state;
    int newton_iters = 0;
};

/// One BDF1 step: solves u - u_old - dt*rhs(u) = 0 by damped Newton.
/// Non-convergence or a singular tridiagonal solve yields converged = false.
StepResult implicit_step(const GridState& current, double dt, const ProblemSpec& spec);

/// One variable-step BDF2 step from the history (prev, current).
StepResult implicit_step_bdf2(const GridState& prev, const GridState& current, double dt,
                              const ProblemSpec& spec);

using Observer = std::function<void(const GridState&)>;

/// Adaptive integration with step-doubling error control. Lands exactly on
/// every requested snapshot time; snapshot times outside [0, t_end] are
/// rejected. Observers run after each accepted step. Deterministic for a
/// fixed spec. Throws SolverError on dt underflow or a non-finite state.
SolveTrace integrate(const ProblemSpec& spec, std::span<const double> snapshot_times,
                     const std::vector<Observer>& observers = {});

/// Convenience: n_snapshots+1 uniform snapshot times over [0, t_end].
std::vector<double> uniform_snapshot_times(double t_end, int n_snapshots);

} // namespace pparab::solver

#endif
