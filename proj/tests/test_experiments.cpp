#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pparab/analytic.hpp"
#include "pparab/errors.hpp"
#include "pparab/experiments.hpp"
#include "pparab/version.hpp"

using namespace pparab;
using namespace pparab::experiments;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ScenarioConfig smoke_config(const std::string& dir) {
    config::Document doc;
    using config::Value;
    doc.sections["scenario"]["name"] = Value::make_string("smoke");
    doc.sections["scenario"]["output_dir"] = Value::make_string(dir);
    doc.sections["problem"]["p"] = Value::make_number(4.0);
    doc.sections["problem"]["n_cells"] = Value::make_number(64);
    doc.sections["problem"]["bc_right"] = Value::make_number(1.0);
    doc.sections["problem"]["t_end"] = Value::make_number(1e-3);
    doc.sections["snapshots"]["count"] = Value::make_number(8);
    doc.sections["analyses"]["waterfall"] = Value::make_boolean(true);
    doc.sections["analyses"]["level_sets"] = Value::make_boolean(true);
    doc.sections["analyses"]["levels"] = Value::make_array({0.25});
    doc.sections["analyses"]["waiting_time"] = Value::make_boolean(true);
    return scenario_from_document(doc);
}

} // namespace

TEST_CASE("scenario_from_document defaults and validation") {
    SUBCASE("flagship defaults") {
        const ScenarioConfig cfg = scenario_from_document(builtin_document("flagship"));
        CHECK(cfg.name == "flagship");
        CHECK(cfg.problem.grid.n_cells == 800);
        CHECK(cfg.problem.t_end ==
              doctest::Approx(1.2 / 48.0).epsilon(1e-12));
        CHECK(cfg.problem.bc_right == 1.0);
        CHECK(cfg.analyses.waiting_time);
        CHECK(cfg.analyses.barrier_memory);
        CHECK(cfg.analyses.barrier_delta == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(cfg.snapshot_count == 400);
    }
    SUBCASE("every builtin materializes") {
        for (const std::string& name : builtin_names())
            CHECK_NOTHROW(scenario_from_document(builtin_document(name)));
        CHECK_THROWS_AS(builtin_document("nope"), ConfigError);
    }
    SUBCASE("rejections") {
        config::Document doc = builtin_document("fig2");
        config::apply_override(doc, "scenario.name=\"bad name\"");
        CHECK_THROWS_AS(scenario_from_document(doc), ConfigError);
        doc = builtin_document("fig2");
        config::apply_override(doc, "schema_version=2");
        CHECK_THROWS_AS(scenario_from_document(doc), ConfigError);
        doc = builtin_document("fig2");
        config::apply_override(doc, "problem.initial=\"starlight\"");
        CHECK_THROWS_AS(scenario_from_document(doc), ConfigError);
        doc = builtin_document("fig2");
        config::apply_override(doc, "integrator.scheme=\"RK4\"");
        CHECK_THROWS_AS(scenario_from_document(doc), ConfigError);
        doc = builtin_document("fig2");
        config::apply_override(doc, "analyses.comparison=\"siblings\"");
        CHECK_THROWS_AS(scenario_from_document(doc), ConfigError);
        doc = builtin_document("fig2");
        config::apply_override(doc, "analyses.waterfall=false");
        CHECK_THROWS_AS(scenario_from_document(doc), ConfigError); // no analyses left
        doc = builtin_document("fig2");
        config::apply_override(doc, "problem.p=1.5");
        CHECK_THROWS_AS(scenario_from_document(doc), std::invalid_argument);
    }
}

TEST_CASE("run_scenario writes outputs, manifest lists exactly the files on disk") {
    const fs::path dir = fs::temp_directory_path() / "pparab_test_smoke";
    fs::remove_all(dir);
    const ScenarioConfig cfg = smoke_config(dir.string());
    const RunManifest manifest = run_scenario(cfg);
    CHECK(manifest.ok);
    CHECK(manifest.scenario == "smoke");
    CHECK(manifest.tool_version == std::string(PPARAB_VERSION));
    CHECK(!manifest.config_hash.empty());

    std::set<std::string> on_disk;
    for (const auto& entry : fs::directory_iterator(dir))
        on_disk.insert(entry.path().filename().string());
    std::set<std::string> listed{"manifest.txt"};
    for (const auto& f : manifest.files)
        listed.insert(f.name);
    CHECK(on_disk == listed);

    // row counts in the manifest match the files
    for (const auto& f : manifest.files) {
        if (f.name.size() < 4 || f.name.substr(f.name.size() - 4) != ".csv")
            continue;
        const std::string content = read_file(dir / f.name);
        long lines = 0;
        for (char ch : content)
            if (ch == '\n')
                ++lines;
        CHECK(lines == f.rows + 1); // header
    }
    fs::remove_all(dir);
}

TEST_CASE("run_scenario is deterministic: identical configs, identical CSV bytes") {
    const fs::path dir_a = fs::temp_directory_path() / "pparab_test_det_a";
    const fs::path dir_b = fs::temp_directory_path() / "pparab_test_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    const RunManifest ma = run_scenario(smoke_config(dir_a.string()));
    const RunManifest mb = run_scenario(smoke_config(dir_b.string()));
    REQUIRE(ma.files.size() == mb.files.size());
    for (const auto& f : ma.files)
        CHECK(read_file(dir_a / f.name) == read_file(dir_b / f.name));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("run_scenario failure path removes partial outputs, keeps a failed manifest") {
    const fs::path dir = fs::temp_directory_path() / "pparab_test_fail";
    fs::remove_all(dir);
    config::Document doc = builtin_document("fig3");
    config::apply_override(doc, "scenario.output_dir=\"" + dir.string() + "\"");
    config::apply_override(doc, "problem.n_cells=64");
    config::apply_override(doc, "problem.t_end=1e-3");
    config::apply_override(doc, "snapshots.count=4");
    config::apply_override(doc, "analyses.levels=[5.0]"); // never attained
    const ScenarioConfig cfg = scenario_from_document(doc);
    CHECK_THROWS_AS(run_scenario(cfg), ConfigError);
    std::set<std::string> on_disk;
    for (const auto& entry : fs::directory_iterator(dir))
        on_disk.insert(entry.path().filename().string());
    CHECK(on_disk == std::set<std::string>{"manifest.txt"});
    const std::string manifest = read_file(dir / "manifest.txt");
    CHECK(manifest.find("status=failed") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("barrier_check_memory") {
    PParams params{4.0, 1};
    solver::ProblemSpec spec;
    spec.params = params;
    spec.grid = build_grid(-1.0, 1.0, 100);
    spec.bc_right = 1.0;
    spec.initial.family = solver::InitialData::Family::PowerPlus;
    spec.t_end = 2e-3;
    const auto times = solver::uniform_snapshot_times(spec.t_end, 8);
    SUBCASE("flagship data is dominated on a short horizon") {
        const solver::SolveTrace trace = solver::integrate(spec, times);
        const BarrierCheckResult r =
            barrier_check_memory(spec.grid, trace, params, 2.0, 1.0, 1.0);
        CHECK(r.pass);
        CHECK(r.hat_T == doctest::Approx(1.0 / 48.0).epsilon(1e-12));
        CHECK(r.checked_up_to == doctest::Approx(2e-3).epsilon(1e-12));
    }
    SUBCASE("zero solution is trivially dominated") {
        solver::ProblemSpec zero = spec;
        zero.bc_right = 0.0;
        zero.initial.family = solver::InitialData::Family::Constant;
        zero.initial.value = 0.0;
        const solver::SolveTrace trace = solver::integrate(zero, times);
        const BarrierCheckResult r =
            barrier_check_memory(zero.grid, trace, params, 2.0, 1.0, 1.0);
        CHECK(r.pass);
        CHECK(r.max_violation <= 0.0);
    }
    SUBCASE("constant-one data violates the hypothesis: configuration error") {
        solver::ProblemSpec bad = spec;
        bad.bc_left = 1.0;
        bad.initial.family = solver::InitialData::Family::Constant;
        bad.initial.value = 1.0;
        const solver::SolveTrace trace = solver::integrate(bad, times);
        CHECK_THROWS_AS(barrier_check_memory(bad.grid, trace, params, 2.0, 1.0, 1.0),
                        ConfigError);
    }
}

TEST_CASE("barrier_check_bracket") {
    const PParams params{4.0, 1};
    tracker::WaitingTimeReport report;
    report.detected_time = 0.0208;
    CHECK(barrier_check_bracket(report, params));
    report.detected_time = 0.05;
    CHECK_FALSE(barrier_check_bracket(report, params));
    report.detected_time = 0.015;
    CHECK_FALSE(barrier_check_bracket(report, params));
    report.detected_time.reset();
    CHECK_THROWS_AS(barrier_check_bracket(report, params), std::invalid_argument);
}

TEST_CASE("convergence_study preconditions") {
    ScenarioConfig base = scenario_from_document(builtin_document("convergence"));
    const std::vector<int> grids{16, 32};
    SUBCASE("structure on tiny grids") {
        ScenarioConfig quick = base;
        quick.problem.t_end = 1e-3;
        const auto rows = convergence_study(quick, grids);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].n_cells == 16);
        CHECK(rows[1].n_cells == 32);
        CHECK(rows[0].l1_err > 0.0);
        CHECK(std::isfinite(rows[1].order_l1));
    }
    SUBCASE("longer horizon never decreases the error") {
        ScenarioConfig quick = base;
        quick.problem.t_end = 1e-3;
        const auto rows_short = convergence_study(quick, std::vector<int>{64, 128});
        quick.problem.t_end = 2e-3;
        const auto rows_long = convergence_study(quick, std::vector<int>{64, 128});
        CHECK(rows_long[0].l1_err >= rows_short[0].l1_err);
        CHECK(rows_long[1].l1_err >= rows_short[1].l1_err);
    }
    SUBCASE("rejections") {
        ScenarioConfig bad = base;
        bad.problem.initial.family = solver::InitialData::Family::PowerPlus;
        CHECK_THROWS_AS(convergence_study(bad, grids), ConfigError);
        bad = base;
        bad.problem.bc_right = 0.5;
        CHECK_THROWS_AS(convergence_study(bad, grids), ConfigError);
        bad = base;
        bad.problem.initial.amplitude = 2.0;
        CHECK_THROWS_AS(convergence_study(bad, grids), ConfigError);
        bad = base;
        bad.problem.t_end = 10.0; // support would leave the domain
        CHECK_THROWS_AS(convergence_study(bad, grids), ConfigError);
        CHECK_THROWS_AS(convergence_study(base, std::vector<int>{100}), ConfigError);
    }
}

TEST_CASE("comparison_check") {
    solver::ProblemSpec spec;
    spec.params = PParams{4.0, 1};
    spec.grid = build_grid(-1.0, 1.0, 64);
    spec.bc_right = 1.0;
    spec.initial.family = solver::InitialData::Family::PowerPlus;
    spec.t_end = 5e-4;
    const auto times = solver::uniform_snapshot_times(spec.t_end, 4);
    SUBCASE("identical problems have zero violation") {
        const ComparisonResult r = comparison_check(spec, spec, times);
        CHECK(r.pass);
        CHECK(r.max_violation == 0.0);
    }
    SUBCASE("mismatched grids are rejected") {
        solver::ProblemSpec other = spec;
        other.grid = build_grid(-1.0, 1.0, 128);
        CHECK_THROWS_AS(comparison_check(spec, other, times), ConfigError);
    }
    SUBCASE("unordered initial data is rejected") {
        solver::ProblemSpec other = spec;
        other.initial.amplitude = 0.5; // lower > upper
        CHECK_THROWS_AS(comparison_check(spec, other, times), ConfigError);
    }
}

TEST_CASE("barenblatt_below_problem matches the tangency construction") {
    const PParams params{4.0, 1};
    const analytic::TangencyParameters tp = analytic::tangency_parameters(params, 0.25);
    const solver::ProblemSpec below = barenblatt_below_problem(params, 0.25, 200, 0.01);
    CHECK(below.bc_right == doctest::Approx(tp.epsilon).epsilon(1e-12));
    const GridState u0 = solver::sample_initial_data(below);
    // value at the right boundary equals hat_U(0,0) = epsilon
    CHECK(u0.values.back() == doctest::Approx(tp.epsilon).epsilon(1e-12));
    // tangent from below: u0 <= x_+^2 everywhere
    for (int i = 0; i < below.grid.n_nodes(); ++i) {
        const double x = below.grid.node(i);
        const double flagship = x > 0.0 ? x * x : 0.0;
        CHECK(u0.values[i] <= flagship + 1e-12);
    }
    // left support edge of hat_U(x-1, 0) sits at 1 - (1-delta) = delta
    const auto edge = tracker::detect_support_edge(below.grid, u0, 1e-10);
    REQUIRE(edge.has_value());
    CHECK(*edge == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("richardson_waiting_time") {
    SUBCASE("recovers the limit of a geometric sequence") {
        // t_k = 1 - 0.3 * 0.5^k
        const std::vector<double> times{0.7, 0.85, 0.925};
        CHECK(richardson_waiting_time(times) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("falls back to the finest value on sign flips") {
        const std::vector<double> times{0.7, 0.85, 0.80};
        CHECK(richardson_waiting_time(times) == 0.80);
    }
    SUBCASE("short inputs") {
        CHECK(richardson_waiting_time(std::vector<double>{0.5}) == 0.5);
        CHECK(richardson_waiting_time(std::vector<double>{0.5, 0.6}) == 0.6);
        CHECK_THROWS_AS(richardson_waiting_time(std::vector<double>{}),
                        std::invalid_argument);
    }
}

TEST_CASE("support_arrival on a synthetic trace") {
    const PParams params{4.0, 1};
    const Grid grid = build_grid(-1.0, 1.0, 100);
    solver::SolveTrace trace;
    // a front moving left: edge at 0.5 - t
    for (double t : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        GridState s;
        s.t = t;
        const double edge = 0.5 - t;
        for (int i = 0; i < grid.n_nodes(); ++i) {
            const double d = grid.node(i) - edge;
            s.values.push_back(d > 0.0 ? d : 0.0);
        }
        trace.snapshots.push_back(s);
    }
    const ArrivalResult arr = support_arrival(grid, trace, params, 0.25, 0.0, 1e-9);
    REQUIRE(arr.arrival_time.has_value());
    CHECK(*arr.arrival_time == doctest::Approx(0.5).epsilon(0.05));
    CHECK(arr.expected_t2 ==
          doctest::Approx(analytic::tangency_parameters(params, 0.25).t2).epsilon(1e-12));
}
