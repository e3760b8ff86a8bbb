#include "pparab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "pparab/csv_io.hpp"
#include "pparab/errors.hpp"
#include "pparab/version.hpp"

namespace fs = std::filesystem;

namespace pparab::experiments {

namespace {

bool filesystem_safe(const std::string& s) {
    if (s.empty())
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            return false;
    return true;
}

double trace_max(const solver::SolveTrace& trace) {
    double m = 0.0;
    for (const GridState& s : trace.snapshots)
        for (double v : s.values)
            m = std::max(m, std::fabs(v));
    return m;
}

double abs_threshold(double rel, double running_max) {
    return std::max(rel * running_max, tracker::kDefaultAbsThreshold);
}

const GridState& nearest_snapshot(const solver::SolveTrace& trace, double t) {
    const GridState* best = &trace.snapshots.front();
    double dist = std::fabs(best->t - t);
    for (const GridState& s : trace.snapshots) {
        const double d = std::fabs(s.t - t);
        if (d < dist) {
            dist = d;
            best = &s;
        }
    }
    return *best;
}

/// Left support edge of the initial snapshot snapped to the nearest node
/// (the interpolated crossing sits within roundoff of a node for the named
/// data families, and a nodal w keeps the power-bound precondition exact).
double initial_left_edge(const Grid& grid, const solver::SolveTrace& trace) {
    const auto edge = tracker::detect_support_edge(grid, trace.snapshots.front(),
                                                   tracker::kDefaultAbsThreshold);
    if (!edge)
        return grid.x_left;
    const int node =
        std::clamp(static_cast<int>(std::lround((*edge - grid.x_left) / grid.dx)), 0,
                   grid.n_cells);
    return grid.node(node);
}

struct OrderingViolation {
    double violation = 0.0;
    double scale = 0.0;
};

OrderingViolation ordering_violation(const solver::SolveTrace& lower,
                                     const solver::SolveTrace& upper) {
    if (lower.snapshots.size() != upper.snapshots.size())
        throw std::invalid_argument("ordering_violation: snapshot counts differ");
    OrderingViolation out;
    for (std::size_t j = 0; j < lower.snapshots.size(); ++j) {
        const std::vector<double>& a = lower.snapshots[j].values;
        const std::vector<double>& b = upper.snapshots[j].values;
        for (std::size_t i = 0; i < a.size(); ++i) {
            out.violation = std::max(out.violation, a[i] - b[i]);
            out.scale = std::max({out.scale, std::fabs(a[i]), std::fabs(b[i])});
        }
    }
    return out;
}

} // namespace

// --- configuration ---------------------------------------------------------

ScenarioConfig scenario_from_document(const config::Document& doc) {
    const long schema = doc.root.count("schema_version")
                            ? doc.integer("", "schema_version")
                            : 1;
    if (schema != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(schema));

    ScenarioConfig cfg;
    cfg.name = doc.text_or("scenario", "name", "scenario");
    if (!filesystem_safe(cfg.name))
        throw ConfigError("scenario name must be nonempty and filesystem-safe: '" +
                          cfg.name + "'");
    cfg.output_dir = doc.text_or("scenario", "output_dir", "out");

    solver::ProblemSpec& pb = cfg.problem;
    pb.params.p = doc.number_or("problem", "p", 4.0);
    pb.params.n = static_cast<int>(doc.integer_or("problem", "n", 1));
    pb.params.validate();
    pb.grid = build_grid(doc.number_or("problem", "x_left", -1.0),
                         doc.number_or("problem", "x_right", 1.0),
                         static_cast<int>(doc.integer_or("problem", "n_cells", 800)));
    pb.bc_left = doc.number_or("problem", "bc_left", 0.0);
    pb.bc_right = doc.number_or("problem", "bc_right", 0.0);
    pb.t_end = doc.number_or("problem", "t_end",
                             1.2 * analytic::critical_time_1d(pb.params));

    const std::string family = doc.text_or("problem", "initial", "power-plus");
    solver::InitialData& id = pb.initial;
    if (family == "power-plus")
        id.family = solver::InitialData::Family::PowerPlus;
    else if (family == "barenblatt")
        id.family = solver::InitialData::Family::Barenblatt;
    else if (family == "constant")
        id.family = solver::InitialData::Family::Constant;
    else if (family == "tabulated")
        id.family = solver::InitialData::Family::Tabulated;
    else
        throw ConfigError("unknown initial data family '" + family + "'");
    id.amplitude = doc.number_or("problem", "initial_amplitude", 1.0);
    id.exponent = doc.number_or("problem", "initial_exponent",
                                std::numeric_limits<double>::quiet_NaN());
    id.origin = doc.number_or("problem", "initial_origin", 0.0);
    id.t0 = doc.number_or("problem", "initial_t0", 0.015625);
    id.C0 = doc.number_or("problem", "initial_c0",
                          std::numeric_limits<double>::quiet_NaN());
    id.value = doc.number_or("problem", "initial_value", 0.0);
    if (doc.has("problem", "initial_table"))
        id.table = doc.array("problem", "initial_table");

    solver::IntegratorOptions& io = pb.integrator;
    const std::string scheme = doc.text_or("integrator", "scheme", "BDF2");
    if (scheme == "BDF1")
        io.scheme = solver::Scheme::BDF1;
    else if (scheme == "BDF2")
        io.scheme = solver::Scheme::BDF2;
    else
        throw ConfigError("unknown integrator scheme '" + scheme + "'");
    io.rtol = doc.number_or("integrator", "rtol", io.rtol);
    io.atol = doc.number_or("integrator", "atol", io.atol);
    io.dt_init = doc.number_or("integrator", "dt_init", io.dt_init);
    io.dt_min = doc.number_or("integrator", "dt_min", io.dt_min);
    io.dt_max = doc.number_or("integrator", "dt_max", io.dt_max);
    io.newton_max_iter =
        static_cast<int>(doc.integer_or("integrator", "newton_max_iter", io.newton_max_iter));
    io.newton_tol = doc.number_or("integrator", "newton_tol", io.newton_tol);

    cfg.snapshot_count = static_cast<int>(doc.integer_or("snapshots", "count", 400));
    if (doc.has("snapshots", "times"))
        cfg.snapshot_times = doc.array("snapshots", "times");

    Analyses& an = cfg.analyses;
    an.waterfall = doc.boolean_or("analyses", "waterfall", false);
    an.level_sets = doc.boolean_or("analyses", "level_sets", false);
    if (doc.has("analyses", "levels"))
        an.levels = doc.array("analyses", "levels");
    an.waiting_time = doc.boolean_or("analyses", "waiting_time", false);
    an.waiting_threshold_rel =
        doc.number_or("analyses", "waiting_threshold", tracker::kDefaultRelThreshold);
    an.exponent_profile = doc.boolean_or("analyses", "exponent_profile", false);
    if (doc.has("analyses", "exponent_times"))
        an.exponent_times = doc.array("analyses", "exponent_times");
    an.profile = doc.boolean_or("analyses", "profile", false);
    if (doc.has("analyses", "profile_times"))
        an.profile_times = doc.array("analyses", "profile_times");
    an.barrier_memory = doc.boolean_or("analyses", "barrier_memory", false);
    an.barrier_delta = doc.number_or("analyses", "barrier_delta",
                                     pb.params.p / (pb.params.p - 2.0));
    an.barrier_M = doc.number_or("analyses", "barrier_M", 1.0);
    an.barrier_r = doc.number_or("analyses", "barrier_r", 1.0);
    an.barrier_bracket = doc.boolean_or("analyses", "barrier_bracket", false);
    an.convergence = doc.boolean_or("analyses", "convergence", false);
    if (doc.has("analyses", "convergence_grids")) {
        an.convergence_grids.clear();
        for (double g : doc.array("analyses", "convergence_grids"))
            an.convergence_grids.push_back(static_cast<int>(std::llround(g)));
    }
    if (doc.has("analyses", "comparison")) {
        an.comparison = true;
        an.comparison_pair = doc.text("analyses", "comparison");
        if (an.comparison_pair != "bump" && an.comparison_pair != "barenblatt-below")
            throw ConfigError("unknown comparison pair '" + an.comparison_pair + "'");
    }
    an.comparison_delta = doc.number_or("analyses", "comparison_delta", 0.25);
    if (!an.any())
        throw ConfigError("scenario requests no analyses");

    cfg.canonical_config = config::canonical_serialize(doc);
    pb.validate();
    return cfg;
}

std::vector<std::string> builtin_names() {
    return {"fig2", "fig3", "fig4", "flagship", "convergence", "arrival"};
}

config::Document builtin_document(const std::string& name) {
    using config::Value;
    config::Document doc;
    doc.root["schema_version"] = Value::make_number(1);
    config::Table& sc = doc.sections["scenario"];
    sc["name"] = Value::make_string(name);
    config::Table& pb = doc.sections["problem"];
    pb["p"] = Value::make_number(4.0);
    pb["x_left"] = Value::make_number(-1.0);
    pb["x_right"] = Value::make_number(1.0);
    pb["n_cells"] = Value::make_number(800);
    pb["bc_left"] = Value::make_number(0.0);
    pb["bc_right"] = Value::make_number(1.0);
    pb["initial"] = Value::make_string("power-plus");
    config::Table& an = doc.sections["analyses"];

    if (name == "fig2") {
        an["waterfall"] = Value::make_boolean(true);
    } else if (name == "fig3") {
        an["level_sets"] = Value::make_boolean(true);
        an["levels"] = Value::make_array({0.02, 0.05, 0.1});
    } else if (name == "fig4") {
        an["profile"] = Value::make_boolean(true);
        an["exponent_profile"] = Value::make_boolean(true);
    } else if (name == "flagship") {
        an["waiting_time"] = Value::make_boolean(true);
        an["barrier_memory"] = Value::make_boolean(true);
        an["barrier_bracket"] = Value::make_boolean(true);
    } else if (name == "convergence") {
        pb["bc_right"] = Value::make_number(0.0);
        pb["initial"] = Value::make_string("barenblatt");
        // center off every node of the nested study grids
        pb["initial_origin"] = Value::make_number(0.10710678118654755);
        pb["initial_t0"] = Value::make_number(0.015625);
        pb["n_cells"] = Value::make_number(100);
        pb["t_end"] = Value::make_number(0.03);
        doc.sections["snapshots"]["count"] = Value::make_number(1);
        an["convergence"] = Value::make_boolean(true);
        an["convergence_grids"] = Value::make_array({100, 200, 400});
    } else if (name == "arrival") {
        PParams params{4.0, 1};
        const analytic::TangencyParameters tp = analytic::tangency_parameters(params, 0.25);
        pb["t_end"] = Value::make_number(1.3 * tp.t2);
        doc.sections["snapshots"]["count"] = Value::make_number(600);
        an["comparison"] = Value::make_string("barenblatt-below");
        an["comparison_delta"] = Value::make_number(0.25);
    } else {
        throw ConfigError("unknown builtin scenario '" + name + "'");
    }
    return doc;
}

// --- direct operations -------------------------------------------------------

double barrier_barenblatt_below(double xi, double t, const analytic::TangencyParameters& tp,
                                const PParams& params) {
    const analytic::BarenblattConstants bc = analytic::barenblatt_constants(params);
    const double inner = std::pow(tp.lambda, 2.0 - params.p) * t + tp.t1;
    return analytic::barenblatt_value(xi, inner, bc, params) / tp.lambda;
}

solver::ProblemSpec barenblatt_below_problem(const PParams& params, double delta, int n_cells,
                                             double t_end) {
    const analytic::TangencyParameters tp = analytic::tangency_parameters(params, delta);
    solver::ProblemSpec spec;
    spec.params = params;
    spec.grid = build_grid(-1.0, 1.0, n_cells);
    spec.bc_left = 0.0;
    spec.bc_right = tp.epsilon; // hat_U(0,0)
    spec.initial.family = solver::InitialData::Family::Barenblatt;
    spec.initial.amplitude = 1.0 / tp.lambda;
    spec.initial.origin = 1.0;
    spec.initial.t0 = tp.t1;
    // C0 = q is the default
    spec.t_end = t_end;
    return spec;
}

ArrivalResult support_arrival(const Grid& grid, const solver::SolveTrace& trace,
                              const PParams& params, double delta, double monitor_x,
                              double threshold) {
    ArrivalResult out;
    out.expected_t2 = analytic::tangency_parameters(params, delta).t2;
    double prev_t = 0.0;
    double prev_edge = std::numeric_limits<double>::quiet_NaN();
    for (const GridState& snap : trace.snapshots) {
        const auto edge = tracker::detect_support_edge(grid, snap, threshold);
        if (!edge)
            continue;
        if (*edge <= monitor_x) {
            if (std::isnan(prev_edge) || prev_edge <= monitor_x) {
                out.arrival_time = snap.t;
            } else {
                const double frac = (prev_edge - monitor_x) / (prev_edge - *edge);
                out.arrival_time = prev_t + frac * (snap.t - prev_t);
            }
            return out;
        }
        prev_t = snap.t;
        prev_edge = *edge;
    }
    return out;
}

BarrierCheckResult barrier_check_memory(const Grid& grid, const solver::SolveTrace& trace,
                                        const PParams& params, double delta, double M,
                                        double r) {
    if (trace.snapshots.empty())
        throw std::invalid_argument("barrier_check_memory: empty trace");
    const double hat_T = analytic::memory_horizon(params, delta, M, r);
    const double w = initial_left_edge(grid, trace);

    // hypotheses of the memory theorem: data below the power bound, u <= M
    const GridState& first = trace.snapshots.front();
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double bound =
            M * pow_abs(grid.node(i) - w, delta) / std::pow(r, delta);
        if (first.values[static_cast<std::size_t>(i)] >
            bound * (1.0 + 1e-12) + 1e-12 * M)
            throw ConfigError("barrier_check_memory: initial data violates the "
                              "power bound at x = " +
                              std::to_string(grid.node(i)));
    }
    if (trace_max(trace) > M * (1.0 + 1e-6))
        throw ConfigError("barrier_check_memory: trace exceeds the bound M");

    BarrierCheckResult out;
    out.hat_T = hat_T;
    const double t_last = trace.snapshots.back().t;
    out.checked_up_to = std::min(0.5 * hat_T, t_last);
    const double inv_exp = -1.0 / (params.p - 2.0);
    for (const GridState& snap : trace.snapshots) {
        if (snap.t > out.checked_up_to)
            break;
        const double time_factor = std::pow(1.0 - snap.t / hat_T, inv_exp);
        for (int i = 0; i < grid.n_nodes(); ++i) {
            const double dist = std::fabs(grid.node(i) - w);
            if (dist > r)
                continue; // comparison region is the ball B(w, r)
            const double vbar = M * time_factor * pow_abs(dist / r, delta);
            out.max_violation = std::max(
                out.max_violation, snap.values[static_cast<std::size_t>(i)] - vbar);
        }
    }
    out.pass = out.max_violation <= 1e-6 * M;
    return out;
}

bool barrier_check_bracket(const tracker::WaitingTimeReport& report, const PParams& params) {
    if (!report.detected_time)
        throw std::invalid_argument("barrier_check_bracket: report has no detected time");
    const double lo = 0.9 * analytic::critical_time_1d(params);
    const double hi = 1.1 * analytic::barrier_upper_time_limit(params);
    return *report.detected_time >= lo && *report.detected_time <= hi;
}

std::vector<ConvergenceRow> convergence_study(const ScenarioConfig& base,
                                              std::span<const int> grids) {
    const solver::ProblemSpec& pb = base.problem;
    if (pb.initial.family != solver::InitialData::Family::Barenblatt)
        throw ConfigError("convergence_study: base scenario must use Barenblatt data");
    if (pb.initial.amplitude != 1.0)
        throw ConfigError("convergence_study: Barenblatt amplitude must be 1 for exactness");
    if (pb.bc_left != 0.0 || pb.bc_right != 0.0)
        throw ConfigError("convergence_study: requires zero Dirichlet values");
    const analytic::BarenblattConstants bc =
        std::isnan(pb.initial.C0) ? analytic::barenblatt_constants(pb.params)
                                  : analytic::barenblatt_constants(pb.params, pb.initial.C0);
    const double t_final = pb.initial.t0 + pb.t_end;
    const double radius_end = analytic::barenblatt_support_radius(t_final, bc, pb.params);
    if (pb.initial.origin - radius_end <= pb.grid.x_left ||
        pb.initial.origin + radius_end >= pb.grid.x_right)
        throw ConfigError("convergence_study: support must stay strictly inside the domain");
    if (grids.size() < 2)
        throw ConfigError("convergence_study: need at least two grids");

    std::vector<ConvergenceRow> rows;
    for (int n_cells : grids) {
        solver::ProblemSpec spec = pb;
        spec.grid = build_grid(pb.grid.x_left, pb.grid.x_right, n_cells);
        const std::vector<double> times{spec.t_end};
        const solver::SolveTrace trace = solver::integrate(spec, times);
        const GridState& last = trace.snapshots.back();
        const ErrorNorms norms = error_norms(
            spec.grid, last, [&](double x) {
                return analytic::barenblatt_value(x - pb.initial.origin, t_final, bc,
                                                  pb.params);
            });
        ConvergenceRow row;
        row.n_cells = n_cells;
        row.max_err = norms.max_norm;
        row.l1_err = norms.l1_norm;
        if (!rows.empty()) {
            const double hx = std::log(static_cast<double>(n_cells) / rows.back().n_cells);
            row.order_max = std::log(rows.back().max_err / row.max_err) / hx;
            row.order_l1 = std::log(rows.back().l1_err / row.l1_err) / hx;
        }
        rows.push_back(row);
    }
    return rows;
}

ComparisonResult comparison_check(const solver::ProblemSpec& lower,
                                  const solver::ProblemSpec& upper,
                                  std::span<const double> snapshot_times) {
    if (lower.grid.x_left != upper.grid.x_left || lower.grid.x_right != upper.grid.x_right ||
        lower.grid.n_cells != upper.grid.n_cells)
        throw ConfigError("comparison_check: grids must match");
    if (lower.bc_left > upper.bc_left || lower.bc_right > upper.bc_right)
        throw ConfigError("comparison_check: Dirichlet values must be ordered");
    const GridState lo0 = solver::sample_initial_data(lower);
    const GridState up0 = solver::sample_initial_data(upper);
    for (std::size_t i = 0; i < lo0.values.size(); ++i)
        if (lo0.values[i] > up0.values[i] + 1e-12)
            throw ConfigError("comparison_check: initial data not ordered pointwise");

    const solver::SolveTrace lo = solver::integrate(lower, snapshot_times);
    const solver::SolveTrace up = solver::integrate(upper, snapshot_times);
    const OrderingViolation v = ordering_violation(lo, up);
    ComparisonResult out;
    out.max_violation = std::max(0.0, v.violation);
    out.scale = v.scale;
    out.pass = out.max_violation <= 1e-6 * std::max(v.scale, 1e-30);
    return out;
}

double richardson_waiting_time(std::span<const double> times) {
    if (times.empty())
        throw std::invalid_argument("richardson_waiting_time: empty input");
    if (times.size() < 3)
        return times.back();
    const double t1 = times[times.size() - 3];
    const double t2 = times[times.size() - 2];
    const double t3 = times[times.size() - 1];
    const double d1 = t2 - t1;
    const double d2 = t3 - t2;
    if (d1 * d2 > 0.0 && std::fabs(d2) < std::fabs(d1))
        return t3 + d2 * d2 / (d1 - d2);
    return t3; // differences do not support extrapolation
}

// --- scenario runner ---------------------------------------------------------

namespace {

void write_manifest(const std::string& path, const RunManifest& m) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write manifest: " + path);
    out << "scenario=" << m.scenario << '\n'
        << "tool_version=" << m.tool_version << '\n'
        << "config_hash=" << m.config_hash << '\n'
        << "status=" << (m.ok ? "ok" : "failed") << '\n';
    if (!m.diagnostic.empty())
        out << "diagnostic=" << m.diagnostic << '\n';
    out << "wall_seconds=" << io::format_double(m.wall_seconds) << '\n';
    for (const EmittedFile& f : m.files)
        out << "file=" << f.name << " rows=" << f.rows << '\n';
    for (const CheckOutcome& c : m.checks)
        out << "check=" << c.name << " pass=" << (c.pass ? "true" : "false")
            << " metric=" << io::format_double(c.metric)
            << (c.detail.empty() ? "" : " detail=" + c.detail) << '\n';
}

std::string level_tag(double level) {
    std::string s = io::format_double(level);
    for (char& c : s)
        if (c == '.' || c == '+')
            c = 'p';
        else if (c == '-')
            c = 'm';
    return s;
}

} // namespace

RunManifest run_scenario(const ScenarioConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.scenario = cfg.name;
    manifest.tool_version = PPARAB_VERSION;
    manifest.config_hash = io::fnv1a_hex(cfg.canonical_config);

    fs::create_directories(cfg.output_dir);
    const auto out_path = [&](const std::string& base) {
        return (fs::path(cfg.output_dir) / base).string();
    };
    auto record = [&](const std::string& base, long rows) {
        manifest.files.push_back({base, rows});
    };
    auto finish = [&](bool completed, const std::string& diagnostic) {
        manifest.ok = completed;
        manifest.diagnostic = diagnostic;
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
        if (!completed) { // partial outputs are removed, the manifest stays as the marker
            for (const EmittedFile& f : manifest.files)
                fs::remove(out_path(f.name));
            manifest.files.clear();
        }
        write_manifest(out_path("manifest.txt"), manifest);
    };

    const solver::ProblemSpec& pb = cfg.problem;
    const std::vector<double> times =
        !cfg.snapshot_times.empty()
            ? cfg.snapshot_times
            : solver::uniform_snapshot_times(pb.t_end, cfg.snapshot_count);

    try {
        const solver::SolveTrace trace = solver::integrate(pb, times);
        const double run_max = trace_max(trace);
        const Grid& grid = pb.grid;
        const Analyses& an = cfg.analyses;

        record(cfg.name + "_stats.txt",
               io::write_stats_kv(out_path(cfg.name + "_stats.txt"), trace.stats));

        if (an.waterfall)
            record(cfg.name + "_waterfall.csv",
                   io::write_trace_csv(out_path(cfg.name + "_waterfall.csv"), grid, trace));

        if (an.level_sets) {
            // edge track (the M = 0 "level") via support detection
            tracker::LevelTrack edge_track;
            edge_track.level = 0.0;
            const double thr = abs_threshold(tracker::kDefaultRelThreshold, run_max);
            for (const GridState& snap : trace.snapshots) {
                const auto e = tracker::detect_support_edge(grid, snap, thr);
                if (!e)
                    continue;
                edge_track.times.push_back(snap.t);
                edge_track.positions.push_back(*e);
            }
            record(cfg.name + "_level_edge.csv",
                   io::write_level_tracks_csv(out_path(cfg.name + "_level_edge.csv"), {},
                                              {edge_track}));
            for (double level : an.levels) {
                // left-most initial crossing seeds the track
                const GridState& u0 = trace.snapshots.front();
                double gamma0 = std::numeric_limits<double>::quiet_NaN();
                for (int i = 0; i < grid.n_cells; ++i) {
                    const double a = u0.values[static_cast<std::size_t>(i)] - level;
                    const double b = u0.values[static_cast<std::size_t>(i) + 1] - level;
                    if (a * b <= 0.0 && (a != 0.0 || b != 0.0)) {
                        gamma0 = grid.node(i) + grid.dx * (a / (a - b));
                        break;
                    }
                }
                if (std::isnan(gamma0))
                    throw ConfigError("level " + io::format_double(level) +
                                      " is not attained by the initial data");
                const tracker::LevelSetTracks tracks =
                    tracker::track_level_set(grid, trace, pb.params, level, gamma0);
                const std::string fname = cfg.name + "_level_" + level_tag(level) + ".csv";
                record(fname, io::write_level_tracks_csv(out_path(fname), {tracks}));
            }
        }

        if (an.waiting_time || an.barrier_bracket) {
            const double thr = abs_threshold(an.waiting_threshold_rel, run_max);
            const tracker::WaitingTimeReport report =
                tracker::waiting_time(grid, trace, pb.params, 0.0, thr);
            record(cfg.name + "_waiting_time.txt",
                   io::write_waiting_time_kv(out_path(cfg.name + "_waiting_time.txt"),
                                             report));
            if (an.barrier_bracket) {
                CheckOutcome check;
                check.name = "barrier_bracket";
                if (report.detected_time) {
                    check.pass = barrier_check_bracket(report, pb.params);
                    check.metric = *report.detected_time;
                } else {
                    check.pass = false;
                    check.detail = "no_departure_detected";
                }
                manifest.checks.push_back(check);
            }
        }

        if (an.exponent_profile) {
            std::vector<double> fit_times = an.exponent_times;
            if (fit_times.empty())
                fit_times = {0.0, pb.t_end};
            std::vector<tracker::ExponentFit> fits;
            for (double t : fit_times) {
                const GridState& snap = nearest_snapshot(trace, t);
                // the exact t = 0 samples carry no integration noise, so the
                // edge may be located at the absolute floor threshold there
                const double thr =
                    snap.t == 0.0 ? tracker::kDefaultAbsThreshold
                                  : abs_threshold(tracker::kDefaultRelThreshold, run_max);
                const auto edge = tracker::detect_support_edge(grid, snap, thr);
                if (!edge)
                    throw ConfigError("exponent_profile: no support edge at t = " +
                                      io::format_double(snap.t));
                fits.push_back(tracker::local_exponent(grid, snap, *edge, 12, 3));
            }
            record(cfg.name + "_exponents.csv",
                   io::write_exponent_csv(out_path(cfg.name + "_exponents.csv"), fits));
        }

        if (an.profile) {
            std::vector<double> prof_times = an.profile_times;
            if (prof_times.empty())
                prof_times = {pb.t_end};
            const analytic::TangencyParameters tp =
                analytic::tangency_parameters(pb.params, 0.25);
            int idx = 0;
            for (double t : prof_times) {
                const GridState& snap = nearest_snapshot(trace, t);
                const double thr =
                    snap.t == 0.0 ? tracker::kDefaultAbsThreshold
                                  : abs_threshold(tracker::kDefaultRelThreshold, run_max);
                const auto edge_opt = tracker::detect_support_edge(grid, snap, thr);
                const double a = edge_opt.value_or(grid.x_left);
                const analytic::BarenblattConstants bb =
                    analytic::barenblatt_constants(pb.params);
                const double inner = std::pow(tp.lambda, 2.0 - pb.params.p) * snap.t + tp.t1;
                const double rhat =
                    analytic::barenblatt_support_radius(inner, bb, pb.params);
                const double center = a + rhat; // shift the reference edge onto a
                std::vector<double> xs, us, bref, iref;
                const double expo = pb.params.p / (pb.params.p - 2.0);
                for (int i = 0; i < grid.n_nodes(); ++i) {
                    const double x = grid.node(i);
                    xs.push_back(x);
                    us.push_back(snap.values[static_cast<std::size_t>(i)]);
                    bref.push_back(barrier_barenblatt_below(x - center, snap.t, tp, pb.params));
                    iref.push_back(x > a ? std::pow(x - a, expo) : 0.0);
                }
                const std::string fname =
                    cfg.name + "_profile_" + std::to_string(idx++) + ".csv";
                record(fname,
                       io::write_profile_csv(out_path(fname),
                                             {"x", "u", "barenblatt_ref", "initial_ref"},
                                             {xs, us, bref, iref}));
            }
        }

        if (an.barrier_memory) {
            const BarrierCheckResult r = barrier_check_memory(
                grid, trace, pb.params, an.barrier_delta, an.barrier_M, an.barrier_r);
            CheckOutcome check;
            check.name = "barrier_memory";
            check.pass = r.pass;
            check.metric = r.max_violation;
            check.detail = "checked_up_to=" + io::format_double(r.checked_up_to);
            manifest.checks.push_back(check);
        }

        if (an.convergence) {
            const std::vector<ConvergenceRow> rows =
                convergence_study(cfg, an.convergence_grids);
            std::vector<double> ns, mx, l1, om, ol;
            for (const ConvergenceRow& r : rows) {
                ns.push_back(r.n_cells);
                mx.push_back(r.max_err);
                l1.push_back(r.l1_err);
                om.push_back(r.order_max);
                ol.push_back(r.order_l1);
            }
            const std::string fname = cfg.name + "_convergence.csv";
            record(fname, io::write_profile_csv(
                              out_path(fname),
                              {"n_cells", "max_err", "l1_err", "order_max", "order_l1"},
                              {ns, mx, l1, om, ol}));
        }

        if (an.comparison) {
            solver::SolveTrace other;
            CheckOutcome check;
            check.name = "comparison_" + an.comparison_pair;
            if (an.comparison_pair == "bump") {
                solver::ProblemSpec upper = pb;
                upper.initial.family = solver::InitialData::Family::Tabulated;
                upper.initial.amplitude = 1.0;
                upper.initial.table.clear();
                const GridState base0 = solver::sample_initial_data(pb);
                const double xc = grid.x_left + 0.65 * (grid.x_right - grid.x_left);
                const double width = 0.05 * (grid.x_right - grid.x_left);
                for (int i = 0; i < grid.n_nodes(); ++i) {
                    const double b = (grid.node(i) - xc) / width;
                    upper.initial.table.push_back(
                        base0.values[static_cast<std::size_t>(i)] +
                        0.1 * std::exp(-b * b));
                }
                other = solver::integrate(upper, times);
                const OrderingViolation v = ordering_violation(trace, other);
                check.pass = v.violation <= 1e-6 * std::max(v.scale, 1e-30);
                check.metric = std::max(0.0, v.violation);
            } else { // barenblatt-below: the base problem is the upper solution
                solver::ProblemSpec below = barenblatt_below_problem(
                    pb.params, an.comparison_delta, grid.n_cells, pb.t_end);
                below.integrator = pb.integrator;
                other = solver::integrate(below, times);
                const OrderingViolation v = ordering_violation(other, trace);
                check.pass = v.violation <= 1e-6 * std::max(v.scale, 1e-30);
                check.metric = std::max(0.0, v.violation);
                const double thr =
                    abs_threshold(tracker::kDefaultRelThreshold, trace_max(other));
                const ArrivalResult arr =
                    support_arrival(grid, other, pb.params, an.comparison_delta, 0.0, thr);
                CheckOutcome arrival;
                arrival.name = "barenblatt_arrival";
                if (arr.arrival_time) {
                    arrival.metric = *arr.arrival_time;
                    arrival.pass =
                        std::fabs(*arr.arrival_time - arr.expected_t2) <= 0.05 * arr.expected_t2;
                    arrival.detail = "expected_t2=" + io::format_double(arr.expected_t2);
                } else {
                    arrival.pass = false;
                    arrival.detail = "support_never_reached_monitor";
                }
                manifest.checks.push_back(arrival);
            }
            manifest.checks.push_back(check);
        }

        finish(true, "");
    } catch (const std::exception& err) {
        finish(false, err.what());
        throw;
    }
    return manifest;
}

} // namespace pparab::experiments
