#include "pparab/mol_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pparab/analytic.hpp"
#include "pparab/errors.hpp"

namespace pparab {

Grid build_grid(double x_left, double x_right, int n_cells) {
    if (!(x_left < x_right))
        throw std::invalid_argument("build_grid: require x_left < x_right");
    if (n_cells < 8)
        throw std::invalid_argument("build_grid: require n_cells >= 8");
    Grid g;
    g.x_left = x_left;
    g.x_right = x_right;
    g.n_cells = n_cells;
    g.dx = (x_right - x_left) / n_cells;
    return g;
}

ErrorNorms error_norms(const Grid& grid, const GridState& state,
                       const std::function<double(double)>& exact) {
    ErrorNorms norms{0.0, 0.0};
    const int nn = grid.n_nodes();
    double prev = 0.0;
    for (int i = 0; i < nn; ++i) {
        const double e = std::fabs(state.values[static_cast<std::size_t>(i)] -
                                   exact(grid.node(i)));
        norms.max_norm = std::max(norms.max_norm, e);
        if (i > 0)
            norms.l1_norm += 0.5 * (prev + e) * grid.dx;
        prev = e;
    }
    return norms;
}

} // namespace pparab

namespace pparab::solver {

void ProblemSpec::validate() const {
    params.validate();
    if (params.n != 1)
        throw std::invalid_argument("ProblemSpec: the MOL solver is 1D (n = 1)");
    if (!(grid.x_left < grid.x_right) || grid.n_cells < 8 || !(grid.dx > 0.0))
        throw std::invalid_argument("ProblemSpec: invalid grid");
    if (bc_left < 0.0 || bc_right < 0.0)
        throw std::invalid_argument("ProblemSpec: Dirichlet values must be >= 0");
    if (!(t_end >= 0.0))
        throw std::invalid_argument("ProblemSpec: require t_end >= 0");
    const IntegratorOptions& io = integrator;
    if (!(io.rtol > 0.0) || !(io.atol > 0.0))
        throw std::invalid_argument("ProblemSpec: tolerances must be positive");
    if (!(io.dt_min <= io.dt_init && io.dt_init <= io.dt_max) || !(io.dt_min > 0.0))
        throw std::invalid_argument("ProblemSpec: require 0 < dt_min <= dt_init <= dt_max");
    if (io.newton_max_iter < 1 || !(io.newton_tol > 0.0))
        throw std::invalid_argument("ProblemSpec: invalid Newton settings");
    if (initial.family == InitialData::Family::Barenblatt && !(initial.t0 > 0.0))
        throw std::invalid_argument("ProblemSpec: Barenblatt data needs t0 > 0");
    if (!(initial.amplitude >= 0.0) || !std::isfinite(initial.amplitude))
        throw std::invalid_argument("ProblemSpec: bad initial amplitude");
}

GridState sample_initial_data(const ProblemSpec& spec) {
    spec.validate();
    const Grid& g = spec.grid;
    GridState state;
    state.t = 0.0;
    state.values.assign(static_cast<std::size_t>(g.n_nodes()), 0.0);
    const InitialData& id = spec.initial;
    switch (id.family) {
    case InitialData::Family::PowerPlus: {
        const double expo = std::isnan(id.exponent)
                                ? spec.params.p / (spec.params.p - 2.0)
                                : id.exponent;
        for (int i = 0; i < g.n_nodes(); ++i) {
            const double s = g.node(i) - id.origin;
            state.values[static_cast<std::size_t>(i)] =
                s > 0.0 ? id.amplitude * std::pow(s, expo) : 0.0;
        }
        break;
    }
    case InitialData::Family::Barenblatt: {
        auto bc = std::isnan(id.C0)
                      ? analytic::barenblatt_constants(spec.params)
                      : analytic::barenblatt_constants(spec.params, id.C0);
        for (int i = 0; i < g.n_nodes(); ++i)
            state.values[static_cast<std::size_t>(i)] =
                id.amplitude *
                analytic::barenblatt_value(g.node(i) - id.origin, id.t0, bc, spec.params);
        break;
    }
    case InitialData::Family::Constant:
        std::fill(state.values.begin(), state.values.end(), id.amplitude * id.value);
        break;
    case InitialData::Family::Tabulated:
        if (id.table.size() != state.values.size())
            throw ConfigError("sample_initial_data: tabulated profile has " +
                              std::to_string(id.table.size()) + " entries, grid needs " +
                              std::to_string(state.values.size()));
        for (std::size_t i = 0; i < id.table.size(); ++i)
            state.values[i] = id.amplitude * id.table[i];
        break;
    }
    state.values.front() = spec.bc_left;
    state.values.back() = spec.bc_right;
    for (double v : state.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("sample_initial_data: non-finite sample");
    return state;
}

std::vector<double> rhs(const GridState& state, const PParams& params, const Grid& grid) {
    const std::size_t nn = state.values.size();
    if (nn != static_cast<std::size_t>(grid.n_nodes()))
        throw std::invalid_argument("rhs: state size does not match grid");
    std::vector<double> out(nn, 0.0);
    const double p = params.p;
    const double inv2dx = 1.0 / (2.0 * grid.dx);
    const double invdx2 = 1.0 / (grid.dx * grid.dx);
    const double* u = state.values.data();
    for (std::size_t i = 1; i + 1 < nn; ++i) {
        if (!std::isfinite(u[i]))
            throw std::invalid_argument("rhs: non-finite state");
        const double D = (u[i + 1] - u[i - 1]) * inv2dx;
        const double H = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invdx2;
        out[i] = (p - 1.0) * pow_abs(D, p - 2.0) * H;
    }
    return out;
}

Tridiagonal jacobian(const GridState& state, const PParams& params, const Grid& grid) {
    const std::size_t nn = state.values.size();
    if (nn != static_cast<std::size_t>(grid.n_nodes()))
        throw std::invalid_argument("jacobian: state size does not match grid");
    Tridiagonal J(nn);
    const double p = params.p;
    const double inv2dx = 1.0 / (2.0 * grid.dx);
    const double invdx2 = 1.0 / (grid.dx * grid.dx);
    const double* u = state.values.data();
    for (std::size_t i = 1; i + 1 < nn; ++i) {
        const double D = (u[i + 1] - u[i - 1]) * inv2dx;
        const double H = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invdx2;
        const double diffus = (p - 1.0) * pow_abs(D, p - 2.0);
        // d/dD (|D|^{p-2}) = (p-2)|D|^{p-3} sign(D); the factor is set to 0 at
        // D = 0 where p < 3 would make it singular (subgradient convention).
        double dDiffus = 0.0;
        if (D != 0.0)
            dDiffus = (p - 1.0) * (p - 2.0) * pow_signed(D, p - 3.0);
        const double a = dDiffus * H * inv2dx;
        J.lower[i] = -a + diffus * invdx2;
        J.diag[i] = diffus * (-2.0 * invdx2);
        J.upper[i] = a + diffus * invdx2;
    }
    return J;
}

namespace {

double max_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::fabs(x));
    return m;
}

/// Newton solve of  u - sum_j c_j u_histting - c_dt*dt*rhs(u) = 0 with the
/// boundary rows pinned. `target` already holds the history combination, so
/// the residual is G(u) = u - target - c_dt*dt*rhs(u) at interior nodes.
StepResult newton_solve(const std::vector<double>& target, const GridState& predictor,
                        double coeff_dt, const ProblemSpec& spec, double t_new) {
    const std::size_t nn = target.size();
    StepResult result;
    result.state.t = t_new;
    result.state.values = predictor.values;
    std::vector<double> residual(nn, 0.0), delta(nn), trial(nn), scratch(nn);

    auto eval_residual = [&](const std::vector<double>& u, std::vector<double>& res) {
        GridState tmp;
        tmp.t = t_new;
        tmp.values = u;
        const std::vector<double> f = rhs(tmp, spec.params, spec.grid);
        for (std::size_t i = 0; i < nn; ++i)
            res[i] = u[i] - target[i] - coeff_dt * f[i];
        res.front() = 0.0; // Dirichlet rows are identities kept at the data
        res.back() = 0.0;
    };

    eval_residual(result.state.values, residual);
    double res_norm = max_norm(residual);
    const double tol = spec.integrator.newton_tol * (1.0 + max_norm(result.state.values));

    for (int it = 0; it < spec.integrator.newton_max_iter; ++it) {
        if (res_norm <= tol) {
            result.converged = true;
            return result;
        }
        ++result.newton_iters;
        Tridiagonal J = jacobian({t_new, result.state.values}, spec.params, spec.grid);
        // Newton matrix I - coeff_dt * J, boundary rows identity.
        for (std::size_t i = 0; i < nn; ++i) {
            J.lower[i] *= -coeff_dt;
            J.diag[i] = 1.0 - coeff_dt * J.diag[i];
            J.upper[i] *= -coeff_dt;
        }
        J.diag.front() = 1.0;
        J.upper.front() = 0.0;
        J.diag.back() = 1.0;
        J.lower.back() = 0.0;
        delta = residual;
        for (double& d : delta)
            d = -d;
        if (!solve_tridiagonal(J, delta, scratch))
            return result; // singular solve -> rejection
        double damping = 1.0;
        bool improved = false;
        for (int attempt = 0; attempt < 5; ++attempt) {
            for (std::size_t i = 0; i < nn; ++i)
                trial[i] = result.state.values[i] + damping * delta[i];
            trial.front() = spec.bc_left;
            trial.back() = spec.bc_right;
            std::vector<double> trial_res(nn);
            bool finite = true;
            for (double v : trial)
                if (!std::isfinite(v)) {
                    finite = false;
                    break;
                }
            if (finite) {
                eval_residual(trial, trial_res);
                const double trial_norm = max_norm(trial_res);
                if (trial_norm < res_norm || trial_norm <= tol) {
                    result.state.values = trial;
                    residual = trial_res;
                    res_norm = trial_norm;
                    improved = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if (!improved)
            return result; // stagnation -> rejection
    }
    if (res_norm <= tol)
        result.converged = true;
    return result;
}

GridState pinned(const GridState& s, const ProblemSpec& spec) {
    GridState out = s;
    out.values.front() = spec.bc_left;
    out.values.back() = spec.bc_right;
    return out;
}

} // namespace

StepResult implicit_step(const GridState& current, double dt, const ProblemSpec& spec) {
    if (!(dt > 0.0))
        throw std::invalid_argument("implicit_step: require dt > 0");
    const GridState cur = pinned(current, spec);
    return newton_solve(cur.values, cur, dt, spec, current.t + dt);
}

StepResult implicit_step_bdf2(const GridState& prev, const GridState& current, double dt,
                              const ProblemSpec& spec) {
    if (!(dt > 0.0))
        throw std::invalid_argument("implicit_step_bdf2: require dt > 0");
    const double h_prev = current.t - prev.t;
    if (!(h_prev > 0.0))
        throw std::invalid_argument("implicit_step_bdf2: history times must increase");
    const double r = dt / h_prev;
    const double denom = 1.0 + 2.0 * r;
    const double a = (1.0 + r) * (1.0 + r) / denom;
    const double b = -r * r / denom;
    const double c = (1.0 + r) / denom;
    const GridState cur = pinned(current, spec);
    std::vector<double> target(cur.values.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = a * cur.values[i] + b * prev.values[i];
    // Dirichlet rows: a + b = (1+2r)/(1+2r) = 1 keeps the data, but pin exactly.
    target.front() = spec.bc_left;
    target.back() = spec.bc_right;
    return newton_solve(target, cur, c * dt, spec, current.t + dt);
}

std::vector<double> uniform_snapshot_times(double t_end, int n_snapshots) {
    std::vector<double> times;
    if (n_snapshots < 1 || t_end <= 0.0) {
        times.push_back(0.0);
        if (t_end > 0.0)
            times.push_back(t_end);
        return times;
    }
    times.reserve(static_cast<std::size_t>(n_snapshots) + 1);
    for (int i = 0; i <= n_snapshots; ++i)
        times.push_back(t_end * static_cast<double>(i) / n_snapshots);
    times.back() = t_end;
    return times;
}

SolveTrace integrate(const ProblemSpec& spec, std::span<const double> snapshot_times,
                     const std::vector<Observer>& observers) {
    spec.validate();
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        if (snapshot_times[i] < 0.0 || snapshot_times[i] > spec.t_end)
            throw std::invalid_argument("integrate: snapshot time outside [0, t_end]");
        if (i > 0 && snapshot_times[i] < snapshot_times[i - 1])
            throw std::invalid_argument("integrate: snapshot times must be sorted");
    }

    SolveTrace trace;
    GridState u = sample_initial_data(spec);
    trace.stats.min_value_seen = *std::min_element(u.values.begin(), u.values.end());
    trace.snapshots.push_back(u);
    if (spec.t_end == 0.0)
        return trace;

    // landing schedule: snapshots plus the final time, strictly increasing
    std::vector<double> landings(snapshot_times.begin(), snapshot_times.end());
    landings.push_back(spec.t_end);
    std::sort(landings.begin(), landings.end());
    landings.erase(std::unique(landings.begin(), landings.end()), landings.end());
    while (!landings.empty() && landings.front() <= 0.0)
        landings.erase(landings.begin());

    const IntegratorOptions& io = spec.integrator;
    const bool bdf2 = io.scheme == Scheme::BDF2;
    double dt = io.dt_init;
    double t = 0.0;
    GridState prev;     // second history point once available
    bool have_history = false;
    std::size_t landing_idx = 0;

    auto check_finite = [&](const GridState& s) {
        for (double v : s.values)
            if (!std::isfinite(v))
                throw SolverError("integrate: non-finite state at t = " + std::to_string(t));
    };

    while (landing_idx < landings.size()) {
        const double t_target = landings[landing_idx];
        const double remaining = t_target - t;
        if (remaining <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t_target)) {
            // sliver: land without a solve, the state change would be O(eps)
            t = t_target;
            u.t = t_target;
            if (std::binary_search(snapshot_times.begin(), snapshot_times.end(), t_target) ||
                t_target == spec.t_end)
                trace.snapshots.push_back(u);
            ++landing_idx;
            continue;
        }
        const double dt_proposed = dt;
        const double dt_try = std::min(dt, remaining);
        const bool truncated = dt_try < dt_proposed;

        const int order = (bdf2 && have_history) ? 2 : 1;
        auto take = [&](const GridState& hist_prev, const GridState& from, double step_dt,
                        bool use_bdf2) {
            return use_bdf2 ? implicit_step_bdf2(hist_prev, from, step_dt, spec)
                            : implicit_step(from, step_dt, spec);
        };
        const bool sub_bdf2 = bdf2 && have_history;

        StepResult big = take(prev, u, dt_try, sub_bdf2);
        trace.stats.newton_iters_total += big.newton_iters;
        StepResult half1, half2;
        bool ok = big.converged;
        if (ok) {
            half1 = take(prev, u, 0.5 * dt_try, sub_bdf2);
            trace.stats.newton_iters_total += half1.newton_iters;
            ok = half1.converged;
        }
        if (ok) {
            half2 = sub_bdf2 || bdf2
                        ? implicit_step_bdf2(u, half1.state, 0.5 * dt_try, spec)
                        : implicit_step(half1.state, 0.5 * dt_try, spec);
            trace.stats.newton_iters_total += half2.newton_iters;
            ok = half2.converged;
        }

        if (!ok) {
            ++trace.stats.steps_rejected;
            dt = 0.5 * dt_try;
            if (dt < io.dt_min)
                throw SolverError("integrate: dt underflow below dt_min at t = " +
                                  std::to_string(t));
            continue;
        }

        // step-doubling error estimate against the fine solution
        double err = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const double scale =
                io.atol + io.rtol * std::max(std::fabs(u.values[i]),
                                             std::fabs(half2.state.values[i]));
            err = std::max(err, std::fabs(big.state.values[i] - half2.state.values[i]) / scale);
        }
        const double denom = std::pow(2.0, order) - 1.0;
        const double controlled = err / denom;

        if (controlled <= 1.0) {
            ++trace.stats.steps_accepted;
            trace.stats.min_dt_used = std::min(trace.stats.min_dt_used, dt_try);
            prev = half1.state;
            have_history = true;
            u = half2.state;
            t += dt_try;
            u.t = t;
            check_finite(u);
            const double mn = *std::min_element(u.values.begin(), u.values.end());
            trace.stats.min_value_seen = std::min(trace.stats.min_value_seen, mn);
            for (const Observer& obs : observers)
                obs(u);
            if (std::fabs(t - t_target) <=
                4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t_target)) {
                t = t_target;
                u.t = t_target;
                prev.t = t_target - 0.5 * dt_try;
                if (std::binary_search(snapshot_times.begin(), snapshot_times.end(), t_target) ||
                    t_target == spec.t_end)
                    trace.snapshots.push_back(u);
                ++landing_idx;
            }
            const double grow =
                std::clamp(0.9 * std::pow(std::max(controlled, 1e-10), -1.0 / (order + 1)),
                           0.2, 5.0);
            double candidate = dt_try * grow;
            if (truncated) // do not let a landing-shortened step shrink the controller
                candidate = std::max(candidate, dt_proposed);
            dt = std::clamp(candidate, io.dt_min, io.dt_max);
        } else {
            ++trace.stats.steps_rejected;
            const double shrink =
                std::clamp(0.9 * std::pow(controlled, -1.0 / (order + 1)), 0.1, 0.5);
            dt = dt_try * shrink;
            if (dt < io.dt_min)
                throw SolverError("integrate: dt underflow below dt_min at t = " +
                                  std::to_string(t));
        }
    }

    // ensure the final snapshot is exactly at t_end even if it was not listed
    if (trace.snapshots.empty() || trace.snapshots.back().t != spec.t_end) {
        u.t = spec.t_end;
        trace.snapshots.push_back(u);
    }
    return trace;
}

} // namespace pparab::solver
