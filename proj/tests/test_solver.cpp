#include <doctest.h>

#include <cmath>

#include "pparab/analytic.hpp"
#include "pparab/errors.hpp"
#include "pparab/mol_solver.hpp"

using namespace pparab;
using namespace pparab::solver;

namespace {

ProblemSpec base_spec(int n_cells = 64, double p = 4.0) {
    ProblemSpec spec;
    spec.params = PParams{p, 1};
    spec.grid = build_grid(-1.0, 1.0, n_cells);
    spec.bc_left = 0.0;
    spec.bc_right = 1.0;
    spec.initial.family = InitialData::Family::PowerPlus;
    spec.t_end = 0.01;
    return spec;
}

GridState state_from(const Grid& grid, double (*f)(double)) {
    GridState s;
    s.t = 0.0;
    for (int i = 0; i < grid.n_nodes(); ++i)
        s.values.push_back(f(grid.node(i)));
    return s;
}

} // namespace

TEST_CASE("build_grid") {
    CHECK_THROWS_AS(build_grid(-1.0, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, -1.0, 100), std::invalid_argument);
    const Grid g = build_grid(-1.0, 1.0, 400);
    CHECK(g.dx == doctest::Approx(0.005).epsilon(1e-15));
    const Grid g2 = build_grid(0.0, 2.0, 100);
    CHECK(g2.node(0) == 0.0);
    CHECK(g2.node(1) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(g2.node(100) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("sample_initial_data families") {
    ProblemSpec spec = base_spec(100);
    SUBCASE("power-plus defaults to exponent p/(p-2)") {
        const GridState s = sample_initial_data(spec);
        const int i = 75; // x = 0.5
        CHECK(spec.grid.node(i) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(s.values[i] == doctest::Approx(0.25).epsilon(1e-14));
        for (int j = 0; j <= 50; ++j) // x <= 0
            CHECK(s.values[j] == (j == 0 ? spec.bc_left : 0.0));
        CHECK(s.values.back() == spec.bc_right);
    }
    SUBCASE("barenblatt matches the analytic oracle at every node") {
        spec.initial.family = InitialData::Family::Barenblatt;
        spec.initial.t0 = 0.015625;
        spec.bc_right = 0.0;
        const GridState s = sample_initial_data(spec);
        const auto bc = analytic::barenblatt_constants(spec.params);
        for (int i = 1; i < spec.grid.n_cells; ++i) {
            const double exact =
                analytic::barenblatt_value(spec.grid.node(i), 0.015625, bc, spec.params);
            CHECK(std::fabs(s.values[i] - exact) <= 1e-15 * std::max(1.0, exact));
        }
    }
    SUBCASE("tabulated of wrong length is rejected") {
        spec.initial.family = InitialData::Family::Tabulated;
        spec.initial.table = {1.0, 2.0, 3.0};
        CHECK_THROWS_AS(sample_initial_data(spec), ConfigError);
    }
}

TEST_CASE("rhs stencil") {
    const Grid grid = build_grid(-1.0, 1.0, 64);
    const PParams params{4.0, 1};
    SUBCASE("constant and linear states sit in the kernel") {
        for (auto f : {+[](double) { return 0.7; }, +[](double x) { return x; }}) {
            const GridState s = state_from(grid, f);
            for (double v : rhs(s, params, grid))
                CHECK(v == 0.0);
        }
    }
    SUBCASE("quadratic state: rhs = 24 x^2 for p = 4 (exact for the stencil)") {
        const GridState s = state_from(grid, +[](double x) { return x * x; });
        const std::vector<double> f = rhs(s, params, grid);
        CHECK(f.front() == 0.0);
        CHECK(f.back() == 0.0);
        for (int i = 1; i < grid.n_cells; ++i) {
            const double x = grid.node(i);
            CHECK(f[i] == doctest::Approx(24.0 * x * x).epsilon(1e-12));
        }
    }
    SUBCASE("non-finite input is rejected") {
        GridState s = state_from(grid, +[](double x) { return x * x; });
        s.values[10] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(rhs(s, params, grid), std::invalid_argument);
    }
}

TEST_CASE("jacobian") {
    const Grid grid = build_grid(-1.0, 1.0, 32);
    SUBCASE("constant state gives the zero matrix for p = 4") {
        const PParams params{4.0, 1};
        const GridState s = state_from(grid, +[](double) { return 1.0; });
        const Tridiagonal J = jacobian(s, params, grid);
        for (std::size_t i = 0; i < J.size(); ++i) {
            CHECK(J.lower[i] == 0.0);
            CHECK(J.diag[i] == 0.0);
            CHECK(J.upper[i] == 0.0);
        }
    }
    SUBCASE("flat spot with curvature stays finite for p < 3 (subgradient guard)") {
        const PParams params{2.5, 1};
        // symmetric kink: D = 0, H != 0 at the center node
        GridState s;
        for (int i = 0; i < grid.n_nodes(); ++i)
            s.values.push_back(std::fabs(grid.node(i)));
        const Tridiagonal J = jacobian(s, params, grid);
        for (std::size_t i = 0; i < J.size(); ++i) {
            CHECK(std::isfinite(J.lower[i]));
            CHECK(std::isfinite(J.diag[i]));
            CHECK(std::isfinite(J.upper[i]));
        }
    }
}

TEST_CASE("implicit_step") {
    ProblemSpec spec = base_spec(64);
    SUBCASE("constant compatible state is a fixed point") {
        spec.bc_left = 0.7;
        spec.bc_right = 0.7;
        spec.initial.family = InitialData::Family::Constant;
        spec.initial.value = 0.7;
        const GridState s = sample_initial_data(spec);
        const StepResult r = implicit_step(s, 1e-4, spec);
        CHECK(r.converged);
        CHECK(r.newton_iters <= 1);
        for (std::size_t i = 0; i < s.values.size(); ++i)
            CHECK(r.state.values[i] == s.values[i]);
    }
    SUBCASE("the linear p-harmonic steady state is stationary") {
        spec.bc_left = 0.2;
        spec.bc_right = 1.0;
        spec.initial.family = InitialData::Family::Tabulated;
        for (int i = 0; i < spec.grid.n_nodes(); ++i)
            spec.initial.table.push_back(0.2 + 0.4 * (spec.grid.node(i) + 1.0));
        const GridState s = sample_initial_data(spec);
        const StepResult r = implicit_step(s, 1e-3, spec);
        CHECK(r.converged);
        for (std::size_t i = 0; i < s.values.size(); ++i)
            CHECK(std::fabs(r.state.values[i] - s.values[i]) <=
                  spec.integrator.newton_tol);
    }
    SUBCASE("one BDF1 step reproduces u + dt rhs(u) to O(dt^2)") {
        spec.initial.family = InitialData::Family::Tabulated;
        for (int i = 0; i < spec.grid.n_nodes(); ++i) {
            const double x = spec.grid.node(i);
            spec.initial.table.push_back(x * x);
        }
        spec.bc_left = 1.0;
        spec.bc_right = 1.0;
        spec.integrator.newton_tol = 1e-12; // keep the Newton floor below dt^2
        const GridState s = sample_initial_data(spec);
        const std::vector<double> f = rhs(s, spec.params, spec.grid);
        double err_coarse = 0.0, err_fine = 0.0;
        for (double dt : {1e-5, 5e-6}) {
            const StepResult r = implicit_step(s, dt, spec);
            REQUIRE(r.converged);
            double err = 0.0;
            for (std::size_t i = 0; i < s.values.size(); ++i)
                err = std::max(err,
                               std::fabs(r.state.values[i] - (s.values[i] + dt * f[i])));
            (dt == 1e-5 ? err_coarse : err_fine) = err;
        }
        CHECK(err_fine <= err_coarse / 3.0); // O(dt^2) halving ratio ~ 4
        CHECK(err_coarse < 1e-3);
    }
    CHECK_THROWS_AS(implicit_step(sample_initial_data(spec), 0.0, spec),
                    std::invalid_argument);
}

TEST_CASE("integrate basics") {
    SUBCASE("t_end = 0 yields only the initial snapshot") {
        ProblemSpec spec = base_spec(64);
        spec.t_end = 0.0;
        const SolveTrace trace = integrate(spec, std::vector<double>{});
        CHECK(trace.snapshots.size() == 1);
        CHECK(trace.snapshots.front().t == 0.0);
    }
    SUBCASE("boundary nodes stay pinned exactly; snapshots land exactly") {
        ProblemSpec spec = base_spec(100);
        spec.t_end = 2e-3;
        const std::vector<double> times{0.0, 7.7e-4, 1.3e-3, 2e-3};
        const SolveTrace trace = integrate(spec, times);
        REQUIRE(trace.snapshots.size() == 4);
        for (std::size_t j = 0; j < times.size(); ++j)
            CHECK(trace.snapshots[j].t == times[j]);
        for (const GridState& s : trace.snapshots) {
            CHECK(s.values.front() == spec.bc_left);
            CHECK(s.values.back() == spec.bc_right);
        }
        CHECK(trace.stats.steps_accepted > 0);
        CHECK(trace.stats.min_dt_used <= spec.integrator.dt_init * 5.0);
    }
    SUBCASE("snapshot outside [0, t_end] is rejected") {
        ProblemSpec spec = base_spec(64);
        CHECK_THROWS_AS(integrate(spec, std::vector<double>{spec.t_end * 2.0}),
                        std::invalid_argument);
    }
    SUBCASE("dt underflow raises SolverError") {
        ProblemSpec spec = base_spec(64);
        spec.integrator.dt_min = 1e-4;
        spec.integrator.dt_init = 1e-4;
        spec.integrator.dt_max = 1e-4;
        spec.integrator.rtol = 1e-14;
        spec.integrator.atol = 1e-16;
        CHECK_THROWS_AS(integrate(spec, std::vector<double>{}), SolverError);
    }
    SUBCASE("BDF1 and BDF2 agree at tight tolerance") {
        ProblemSpec spec = base_spec(100);
        spec.t_end = 5e-3;
        spec.integrator.rtol = 1e-9;
        spec.integrator.atol = 1e-12;
        ProblemSpec spec1 = spec;
        spec1.integrator.scheme = Scheme::BDF1;
        const std::vector<double> times{spec.t_end};
        const SolveTrace a = integrate(spec, times);
        const SolveTrace b = integrate(spec1, times);
        double dev = 0.0;
        for (std::size_t i = 0; i < a.snapshots.back().values.size(); ++i)
            dev = std::max(dev, std::fabs(a.snapshots.back().values[i] -
                                          b.snapshots.back().values[i]));
        CHECK(dev < 1e-6);
    }
}

TEST_CASE("integrate against the exact separable solution (short horizon)") {
    // u(x,t) = (1 - 48 t)^{-1/2} x_+^2 solves the flagship problem away from
    // the right boundary; on a short horizon the boundary influence stays
    // near x = 1 and the interior error is discretization-level
    ProblemSpec spec = base_spec(400);
    spec.t_end = 2e-3;
    const SolveTrace trace = integrate(spec, std::vector<double>{spec.t_end});
    const GridState& last = trace.snapshots.back();
    const double factor = 1.0 / std::sqrt(1.0 - 48.0 * spec.t_end);
    double worst = 0.0;
    for (int i = 0; i < spec.grid.n_nodes(); ++i) {
        const double x = spec.grid.node(i);
        if (x > 0.5)
            continue;
        const double exact = x > 0.0 ? factor * x * x : 0.0;
        worst = std::max(worst, std::fabs(last.values[i] - exact));
    }
    CHECK(worst < 2e-6);
}

TEST_CASE("error_norms") {
    const Grid grid = build_grid(-1.0, 1.0, 400);
    GridState s = state_from(grid, +[](double x) { return std::fabs(x); });
    SUBCASE("zero against itself") {
        const ErrorNorms n = error_norms(grid, s, [](double x) { return std::fabs(x); });
        CHECK(n.max_norm == 0.0);
        CHECK(n.l1_norm == 0.0);
    }
    SUBCASE("constant offset") {
        const ErrorNorms n =
            error_norms(grid, s, [](double x) { return std::fabs(x) + 0.25; });
        CHECK(n.max_norm == doctest::Approx(0.25).epsilon(1e-13));
    }
    SUBCASE("trapezoid of |x| on [-1,1] is exactly 1 with a node at 0") {
        const ErrorNorms n = error_norms(grid, s, [](double) { return 0.0; });
        CHECK(n.max_norm == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(n.l1_norm == doctest::Approx(1.0).epsilon(1e-12));
    }
}
