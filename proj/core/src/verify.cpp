#include "pparab/verify.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "pparab/analytic.hpp"
#include "pparab/csv_io.hpp"
#include "pparab/experiments.hpp"
#include "pparab/mol_solver.hpp"
#include "pparab/tracker.hpp"

namespace pparab::verify {

namespace {

using Clock = std::chrono::steady_clock;

class Criterion {
public:
    Criterion(int number, std::string title) : start_(Clock::now()) {
        result_.number = number;
        result_.title = std::move(title);
        result_.pass = true;
    }

    void check(bool ok, const std::string& what) {
        result_.pass = result_.pass && ok;
        result_.details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }

    CriterionResult finish() {
        result_.wall_seconds =
            std::chrono::duration<double>(Clock::now() - start_).count();
        return result_;
    }

private:
    CriterionResult result_;
    Clock::time_point start_;
};

std::string num(double v) { return io::format_double(v); }

bool rel_close(double a, double b, double tol) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) <= tol * scale;
}

solver::ProblemSpec flagship_problem(int n_cells) {
    solver::ProblemSpec spec;
    spec.params = PParams{4.0, 1};
    spec.grid = build_grid(-1.0, 1.0, n_cells);
    spec.bc_left = 0.0;
    spec.bc_right = 1.0;
    spec.initial.family = solver::InitialData::Family::PowerPlus;
    spec.t_end = 1.2 * analytic::critical_time_1d(spec.params);
    return spec;
}

struct FlagshipRun {
    solver::ProblemSpec spec;
    solver::SolveTrace trace;
    tracker::WaitingTimeReport report;
};

FlagshipRun run_flagship(int n_cells) {
    FlagshipRun run;
    run.spec = flagship_problem(n_cells);
    const std::vector<double> times =
        solver::uniform_snapshot_times(run.spec.t_end, 400);
    run.trace = solver::integrate(run.spec, times);
    double run_max = 0.0;
    for (const GridState& s : run.trace.snapshots)
        for (double v : s.values)
            run_max = std::max(run_max, std::fabs(v));
    const double thr = std::max(tracker::kDefaultRelThreshold * run_max,
                                tracker::kDefaultAbsThreshold);
    run.report = tracker::waiting_time(run.spec.grid, run.trace, run.spec.params, 0.0, thr);
    return run;
}

} // namespace

CriterionResult criterion1_closed_forms() {
    Criterion c(1, "closed-form identities at 1e-12 relative");
    for (double p : {2.5, 3.0, 4.0, 6.0}) {
        const PParams params{p, 1};
        const double direct =
            std::pow(p - 2.0, p - 1.0) / (2.0 * std::pow(p, p - 1.0) * (p - 1.0));
        const double hat_t = analytic::critical_time_1d(params);
        c.check(rel_close(hat_t, direct, 1e-12), "p=" + num(p) + " hat_t=q^{p-1}=" + num(hat_t));
        const double t20 = analytic::barrier_upper_time_limit(params);
        c.check(rel_close(t20, std::pow(p - 2.0, p - 1.0) / std::pow(p, p), 1e-12),
                "p=" + num(p) + " t2(0)=" + num(t20));
        c.check(rel_close(t20 / hat_t, 2.0 * (p - 1.0) / p, 1e-12),
                "p=" + num(p) + " t2(0)/hat_t=2(p-1)/p");
        // cross-check: hat_t equals the memory horizon at the critical decay
        const double horizon = analytic::memory_horizon(params, p / (p - 2.0), 1.0, 1.0);
        c.check(rel_close(hat_t, horizon, 1e-12), "p=" + num(p) + " hat_t=(c_p c_o)^{p-2}");

        double worst_r = 0.0, worst_tomte = 0.0, worst_tomte_d = 0.0;
        for (int i = 1; i <= 100; ++i) {
            const double delta = static_cast<double>(i) / 101.0;
            const analytic::TangencyParameters tp =
                analytic::tangency_parameters(params, delta);
            const double om = 1.0 - delta;
            worst_r = std::max(worst_r, std::fabs(tp.r_touch - std::pow(om, p)) /
                                            std::max(std::pow(om, p), 1e-300));
            const double lhs = std::pow(tp.epsilon, (p - 2.0) / (p - 1.0)) *
                               (1.0 - std::pow(tp.r_touch / om, p / (p - 1.0)));
            const double rhs = std::pow(1.0 - tp.r_touch, p / (p - 1.0));
            worst_tomte =
                std::max(worst_tomte, std::fabs(lhs - rhs) / std::max(rhs, 1e-300));
            const double dl = std::pow(tp.epsilon, (p - 2.0) / (p - 1.0)) / om *
                              std::pow(tp.r_touch / om, 1.0 / (p - 1.0));
            const double dr = std::pow(1.0 - tp.r_touch, 1.0 / (p - 1.0));
            worst_tomte_d =
                std::max(worst_tomte_d, std::fabs(dl - dr) / std::max(dr, 1e-300));
        }
        c.check(worst_r <= 1e-12, "p=" + num(p) + " r_touch=(1-delta)^p, worst " + num(worst_r));
        c.check(worst_tomte <= 1e-12, "p=" + num(p) + " tangency eq, worst " + num(worst_tomte));
        c.check(worst_tomte_d <= 1e-12,
                "p=" + num(p) + " tangency derivative eq, worst " + num(worst_tomte_d));
    }
    return c.finish();
}

namespace {

CriterionResult criterion2(const FlagshipRun& r200, const FlagshipRun& r400,
                           const FlagshipRun& r800) {
    Criterion c(2, "critical-time reproduction (flagship, N=800 + Richardson)");
    const double hat_t = analytic::critical_time_1d(PParams{4.0, 1});
    const double lo = 0.9 * hat_t;
    const double hi = 1.1 / 32.0;
    const bool have = r800.report.detected_time.has_value();
    c.check(have, "N=800 departure detected");
    if (have) {
        const double d800 = *r800.report.detected_time;
        c.check(d800 >= lo && d800 <= hi,
                "detected " + num(d800) + " in [" + num(lo) + ", " + num(hi) + "]");
    }
    if (r200.report.detected_time && r400.report.detected_time && have) {
        const double seq[] = {*r200.report.detected_time, *r400.report.detected_time,
                              *r800.report.detected_time};
        const double extrap = experiments::richardson_waiting_time(seq);
        c.check(std::fabs(extrap - hat_t) <= 0.25 * hat_t,
                "Richardson " + num(extrap) + " within 25% of " + num(hat_t) +
                    " (N=200: " + num(seq[0]) + ", N=400: " + num(seq[1]) +
                    ", N=800: " + num(seq[2]) + ")");
    } else {
        c.check(false, "departure detected on all of N in {200,400,800}");
    }
    return c.finish();
}

CriterionResult criterion3(const FlagshipRun& r800) {
    Criterion c(3, "profile edge exponents (Fig. 4)");
    const Grid& grid = r800.spec.grid;
    const GridState& last = r800.trace.snapshots.back();
    double run_max = 0.0;
    for (const GridState& s : r800.trace.snapshots)
        for (double v : s.values)
            run_max = std::max(run_max, std::fabs(v));
    const double thr = std::max(tracker::kDefaultRelThreshold * run_max,
                                tracker::kDefaultAbsThreshold);
    const auto edge_end = tracker::detect_support_edge(grid, last, thr);
    c.check(edge_end.has_value(), "support edge found at t = 1.2 hat_t");
    if (edge_end) {
        const tracker::ExponentFit fit =
            tracker::local_exponent(grid, last, *edge_end, 12, 3);
        c.check(std::fabs(fit.exponent - 1.5) <= 0.2,
                "exponent(1.2 hat_t) = " + num(fit.exponent) + " within 1.5 +- 0.2");
        c.check(fit.fit_quality >= 0.98,
                "fit quality " + num(fit.fit_quality) + " >= 0.98");
    }
    const GridState& first = r800.trace.snapshots.front();
    const auto edge0 =
        tracker::detect_support_edge(grid, first, tracker::kDefaultAbsThreshold);
    c.check(edge0.has_value(), "support edge found at t = 0");
    if (edge0) {
        const tracker::ExponentFit fit0 =
            tracker::local_exponent(grid, first, *edge0, 12, 3);
        c.check(std::fabs(fit0.exponent - 2.0) <= 0.05,
                "exponent(0) = " + num(fit0.exponent) + " within 2.0 +- 0.05");
    }
    return c.finish();
}

CriterionResult criterion4() {
    Criterion c(4, "Barenblatt exact-solution convergence (N in {100,200,400})");
    const experiments::ScenarioConfig base = experiments::scenario_from_document(
        experiments::builtin_document("convergence"));
    const std::vector<int> grids{100, 200, 400};
    const std::vector<experiments::ConvergenceRow> rows =
        experiments::convergence_study(base, grids);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double ratio = rows[i - 1].l1_err / rows[i].l1_err;
        c.check(rows[i].l1_err < rows[i - 1].l1_err && ratio >= 1.5,
                "L1 " + num(rows[i - 1].l1_err) + " -> " + num(rows[i].l1_err) + " (N=" +
                    std::to_string(rows[i].n_cells) + "), ratio " + num(ratio) + " >= 1.5");
    }
    c.check(rows.back().order_l1 >= 0.8,
            "finest-pair observed L1 order " + num(rows.back().order_l1) + " >= 0.8");
    return c.finish();
}

CriterionResult criterion5(const FlagshipRun& r800) {
    Criterion c(5, "memory-effect domination up to hat_T/2");
    const experiments::BarrierCheckResult res = experiments::barrier_check_memory(
        r800.spec.grid, r800.trace, r800.spec.params, 2.0, 1.0, 1.0);
    c.check(rel_close(res.hat_T, 1.0 / 48.0, 1e-12), "hat_T = 1/48");
    c.check(rel_close(res.checked_up_to, 1.0 / 96.0, 1e-12), "checked up to 1/96");
    c.check(res.pass, "max violation " + num(res.max_violation) + " <= 1e-6");
    return c.finish();
}

CriterionResult criterion6(const FlagshipRun& r800) {
    Criterion c(6, "barrier arrival upper bound (delta = 0.25)");
    const PParams params{4.0, 1};
    const analytic::TangencyParameters tp = analytic::tangency_parameters(params, 0.25);
    solver::ProblemSpec below =
        experiments::barenblatt_below_problem(params, 0.25, 800, 1.3 * tp.t2);
    const std::vector<double> times = solver::uniform_snapshot_times(below.t_end, 600);
    const solver::SolveTrace trace = solver::integrate(below, times);
    double run_max = 0.0;
    for (const GridState& s : trace.snapshots)
        for (double v : s.values)
            run_max = std::max(run_max, std::fabs(v));
    const double thr = std::max(tracker::kDefaultRelThreshold * run_max,
                                tracker::kDefaultAbsThreshold);
    const experiments::ArrivalResult arr =
        experiments::support_arrival(below.grid, trace, params, 0.25, 0.0, thr);
    c.check(arr.arrival_time.has_value(), "support reaches x = 0");
    if (arr.arrival_time)
        c.check(std::fabs(*arr.arrival_time - tp.t2) <= 0.05 * tp.t2,
                "arrival " + num(*arr.arrival_time) + " within 5% of t2 = " + num(tp.t2));
    const double hi = 1.1 * analytic::barrier_upper_time_limit(params);
    c.check(r800.report.detected_time && *r800.report.detected_time <= hi,
            "flagship waiting time <= 1.1 t2(0) = " + num(hi));
    return c.finish();
}

CriterionResult criterion7() {
    Criterion c(7, "property suites (Jacobian, comparison, determinism, fixed points, scaling)");

    // Jacobian vs central finite differences on random smooth positive states
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double p : {3.0, 4.0}) {
        const PParams params{p, 1};
        const Grid grid = build_grid(-1.0, 1.0, 64);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            GridState state;
            state.t = 0.0;
            const double a1 = 1.0 + unif(rng), a2 = 2.0 * unif(rng) - 1.0,
                         k1 = 1.0 + 3.0 * unif(rng), ph = 6.28 * unif(rng);
            state.values.resize(static_cast<std::size_t>(grid.n_nodes()));
            for (int i = 0; i < grid.n_nodes(); ++i) {
                const double x = grid.node(i);
                state.values[static_cast<std::size_t>(i)] =
                    1.5 + a1 * std::sin(k1 * x + ph) * 0.4 + a2 * 0.3 * x * x;
            }
            const Tridiagonal J = solver::jacobian(state, params, grid);
            double scale = 1e-30;
            for (std::size_t i = 0; i < J.size(); ++i)
                scale = std::max({scale, std::fabs(J.lower[i]), std::fabs(J.diag[i]),
                                  std::fabs(J.upper[i])});
            // central finite differences column by column
            for (int j = 0; j < grid.n_nodes(); ++j) {
                const double h = 1e-7 * (1.0 + std::fabs(state.values[static_cast<std::size_t>(j)]));
                GridState up = state, dn = state;
                up.values[static_cast<std::size_t>(j)] += h;
                dn.values[static_cast<std::size_t>(j)] -= h;
                const std::vector<double> fu = solver::rhs(up, params, grid);
                const std::vector<double> fd = solver::rhs(dn, params, grid);
                for (int i = std::max(1, j - 1); i <= std::min(grid.n_cells - 1, j + 1); ++i) {
                    const double fdv = (fu[static_cast<std::size_t>(i)] -
                                        fd[static_cast<std::size_t>(i)]) /
                                       (2.0 * h);
                    double an = 0.0;
                    if (i == j)
                        an = J.diag[static_cast<std::size_t>(i)];
                    else if (j == i - 1)
                        an = J.lower[static_cast<std::size_t>(i)];
                    else
                        an = J.upper[static_cast<std::size_t>(i)];
                    worst = std::max(worst, std::fabs(an - fdv) / scale);
                }
            }
        }
        c.check(worst <= 1e-6,
                "p=" + num(p) + " Jacobian vs FD, worst relative " + num(worst));
    }

    // discrete comparison on 5 ordered pairs; tight ODE tolerances so the
    // spatial ordering property is not masked by time-integration error
    {
        solver::ProblemSpec base = flagship_problem(200);
        base.t_end = 0.005;
        base.integrator.rtol = 1e-9;
        base.integrator.atol = 1e-12;
        const std::vector<double> times = solver::uniform_snapshot_times(base.t_end, 10);
        const GridState base0 = solver::sample_initial_data(base);
        double worst = 0.0;
        for (double xc : {-0.5, -0.1, 0.3, 0.5, 0.7}) {
            solver::ProblemSpec upper = base;
            upper.initial.family = solver::InitialData::Family::Tabulated;
            upper.initial.table.clear();
            for (int i = 0; i < base.grid.n_nodes(); ++i) {
                const double b = (base.grid.node(i) - xc) / 0.1;
                upper.initial.table.push_back(
                    base0.values[static_cast<std::size_t>(i)] + 0.1 * std::exp(-b * b));
            }
            const experiments::ComparisonResult res =
                experiments::comparison_check(base, upper, times);
            worst = std::max(worst, res.max_violation / std::max(res.scale, 1e-30));
        }
        c.check(worst <= 1e-6, "comparison ordering, worst relative violation " + num(worst));
    }

    // determinism: bit-identical reruns
    {
        solver::ProblemSpec spec = flagship_problem(200);
        spec.t_end = 0.003;
        const std::vector<double> times = solver::uniform_snapshot_times(spec.t_end, 20);
        const solver::SolveTrace a = solver::integrate(spec, times);
        const solver::SolveTrace b = solver::integrate(spec, times);
        bool identical = a.snapshots.size() == b.snapshots.size() &&
                         a.stats.steps_accepted == b.stats.steps_accepted;
        for (std::size_t j = 0; identical && j < a.snapshots.size(); ++j)
            identical = a.snapshots[j].t == b.snapshots[j].t &&
                        a.snapshots[j].values == b.snapshots[j].values;
        c.check(identical, "two identical runs produce bit-identical traces");
    }

    // zero data with zero Dirichlet values is a fixed point
    {
        solver::ProblemSpec spec = flagship_problem(64);
        spec.bc_right = 0.0;
        spec.initial.family = solver::InitialData::Family::Constant;
        spec.initial.value = 0.0;
        spec.t_end = 0.01;
        const std::vector<double> times = solver::uniform_snapshot_times(spec.t_end, 5);
        const solver::SolveTrace trace = solver::integrate(spec, times);
        double worst = 0.0;
        for (const GridState& s : trace.snapshots)
            for (double v : s.values)
                worst = std::max(worst, std::fabs(v));
        c.check(worst == 0.0, "zero solution stays exactly zero");
    }

    // the linear p-harmonic steady state is stationary
    {
        solver::ProblemSpec spec = flagship_problem(64);
        spec.bc_left = 0.2;
        spec.bc_right = 1.0;
        spec.initial.family = solver::InitialData::Family::Tabulated;
        spec.initial.table.clear();
        for (int i = 0; i < spec.grid.n_nodes(); ++i) {
            const double s = (spec.grid.node(i) - spec.grid.x_left) /
                             (spec.grid.x_right - spec.grid.x_left);
            spec.initial.table.push_back(0.2 + 0.8 * s);
        }
        spec.t_end = 0.01;
        const std::vector<double> times = solver::uniform_snapshot_times(spec.t_end, 5);
        const solver::SolveTrace trace = solver::integrate(spec, times);
        double worst = 0.0;
        for (const GridState& s : trace.snapshots)
            for (int i = 0; i < spec.grid.n_nodes(); ++i)
                worst = std::max(worst, std::fabs(s.values[static_cast<std::size_t>(i)] -
                                                  spec.initial.table[static_cast<std::size_t>(i)]));
        c.check(worst <= 10.0 * spec.integrator.newton_tol,
                "steady state stationary, drift " + num(worst));
    }

    // intrinsic scaling: u -> lambda u, t -> lambda^{2-p} t
    {
        const double lambda = 2.0;
        solver::ProblemSpec base = flagship_problem(400);
        base.t_end = 0.02;
        solver::ProblemSpec scaled = base;
        scaled.initial.amplitude = lambda;
        scaled.bc_left *= lambda;
        scaled.bc_right *= lambda;
        const double mu = std::pow(lambda, 2.0 - base.params.p);
        scaled.t_end = mu * base.t_end;
        std::vector<double> base_times{0.5 * base.t_end, base.t_end};
        std::vector<double> scaled_times{0.5 * scaled.t_end, scaled.t_end};
        const solver::SolveTrace tb = solver::integrate(base, base_times);
        const solver::SolveTrace ts = solver::integrate(scaled, scaled_times);
        double worst = 0.0;
        for (std::size_t j = 0; j < tb.snapshots.size(); ++j)
            for (std::size_t i = 0; i < tb.snapshots[j].values.size(); ++i)
                worst = std::max(worst,
                                 std::fabs(ts.snapshots[j].values[i] / lambda -
                                           tb.snapshots[j].values[i]));
        c.check(worst <= 1e-3, "intrinsic scaling deviation " + num(worst) + " <= 1e-3");
    }

    return c.finish();
}

} // namespace

std::vector<CriterionResult> run_all() {
    std::vector<CriterionResult> results;
    results.push_back(criterion1_closed_forms());
    const FlagshipRun r200 = run_flagship(200);
    const FlagshipRun r400 = run_flagship(400);
    const FlagshipRun r800 = run_flagship(800);
    results.push_back(criterion2(r200, r400, r800));
    results.push_back(criterion3(r800));
    results.push_back(criterion4());
    results.push_back(criterion5(r800));
    results.push_back(criterion6(r800));
    results.push_back(criterion7());
    return results;
}

} // namespace pparab::verify
