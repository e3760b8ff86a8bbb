// pparab: numerical laboratory for the degenerate p-parabolic equation
// u_t = Delta_p u (p > 2) in one space dimension.
//
// Exit codes: 0 success / all checks pass, 1 check failure,
//             2 configuration error, 3 solver hard error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "pparab/analytic.hpp"
#include "pparab/config.hpp"
#include "pparab/csv_io.hpp"
#include "pparab/errors.hpp"
#include "pparab/experiments.hpp"
#include "pparab/verify.hpp"
#include "pparab/version.hpp"

namespace {

using namespace pparab;

std::string default_output_dir() {
    if (const char* env = std::getenv("PPARAB_OUTPUT_DIR"))
        return env;
    return "out";
}

struct CommonFlags {
    double p = 4.0;
    int n_cells = 800;
    double t_end = -1.0; // <0 means scenario default
    int snapshots = -1;
    std::string output_dir;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--p", flags.p, "equation exponent p > 2")->capture_default_str();
    cmd->add_option("--n-cells", flags.n_cells, "number of grid cells")
        ->capture_default_str();
    cmd->add_option("--t-end", flags.t_end, "time horizon (default 1.2*hat_t)");
    cmd->add_option("--snapshots", flags.snapshots, "uniform snapshot count");
    cmd->add_option("-o,--output-dir", flags.output_dir,
                    "output directory (env PPARAB_OUTPUT_DIR, default ./out)");
    cmd->add_option("--set", flags.overrides,
                    "config override section.key=value, applied after defaults "
                    "(schema: docs/scenario-config.md)");
}

void apply_common(config::Document& doc, const CommonFlags& flags) {
    config::apply_override(doc, "problem.p=" + io::format_double(flags.p));
    config::apply_override(doc, "problem.n_cells=" + std::to_string(flags.n_cells));
    if (flags.t_end >= 0.0)
        config::apply_override(doc, "problem.t_end=" + io::format_double(flags.t_end));
    if (flags.snapshots > 0)
        config::apply_override(doc, "snapshots.count=" + std::to_string(flags.snapshots));
    for (const std::string& ov : flags.overrides)
        config::apply_override(doc, ov);
    const std::string dir = flags.output_dir.empty() ? default_output_dir() : flags.output_dir;
    config::apply_override(doc, "scenario.output_dir=\"" + dir + "\"");
}

int manifest_exit(const experiments::RunManifest& manifest) {
    for (const auto& check : manifest.checks)
        if (!check.pass)
            return 1;
    return 0;
}

void print_manifest(const experiments::RunManifest& m) {
    std::cout << "scenario " << m.scenario << " [" << m.config_hash << "] "
              << (m.ok ? "ok" : "FAILED") << " in " << m.wall_seconds << " s\n";
    for (const auto& f : m.files)
        std::cout << "  wrote " << f.name << " (" << f.rows << " rows)\n";
    for (const auto& c : m.checks)
        std::cout << "  check " << c.name << ": " << (c.pass ? "pass" : "FAIL")
                  << " (metric " << io::format_double(c.metric) << ")"
                  << (c.detail.empty() ? "" : " " + c.detail) << "\n";
}

int run_builtin(const std::string& name, const CommonFlags& flags) {
    config::Document doc = experiments::builtin_document(name);
    apply_common(doc, flags);
    const experiments::ScenarioConfig cfg = experiments::scenario_from_document(doc);
    const experiments::RunManifest manifest = experiments::run_scenario(cfg);
    print_manifest(manifest);
    return manifest_exit(manifest);
}

int cmd_constants(const std::vector<double>& ps, int n) {
    std::cout << "p,k,q,hat_t,t2_0,ratio\n";
    for (double p : ps) {
        const PParams params{p, n};
        const analytic::BarenblattConstants bc = analytic::barenblatt_constants(params);
        const double t20 = analytic::barrier_upper_time_limit(params);
        std::string hat_t = "n/a", ratio = "n/a";
        if (n == 1) {
            const double ht = analytic::critical_time_1d(params);
            hat_t = io::format_double(ht);
            ratio = io::format_double(t20 / ht);
        }
        std::cout << io::format_double(p) << ',' << io::format_double(bc.k) << ','
                  << io::format_double(bc.q) << ',' << hat_t << ','
                  << io::format_double(t20) << ',' << ratio << '\n';
    }
    return 0;
}

int cmd_waiting_time(const CommonFlags& flags) {
    config::Document doc = experiments::builtin_document("flagship");
    apply_common(doc, flags);
    const experiments::ScenarioConfig cfg = experiments::scenario_from_document(doc);
    const experiments::RunManifest manifest = experiments::run_scenario(cfg);
    // the report file doubles as the stdout payload
    std::ifstream in(cfg.output_dir + "/" + cfg.name + "_waiting_time.txt");
    std::cout << in.rdbuf();
    print_manifest(manifest);
    return manifest_exit(manifest);
}

int cmd_verify() {
    const std::vector<verify::CriterionResult> results = verify::run_all();
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.number << ": "
                  << r.title << " (" << r.wall_seconds << " s)\n";
        for (const std::string& d : r.details)
            std::cout << "       " << d << '\n';
        all = all && r.pass;
    }
    std::cout << (all ? "VERIFY PASS" : "VERIFY FAIL") << '\n';
    return all ? 0 : 1;
}

int cmd_run(const std::vector<std::string>& paths, const std::vector<std::string>& overrides,
            const std::string& output_dir, int jobs) {
    std::vector<experiments::ScenarioConfig> configs;
    for (const std::string& path : paths) {
        config::Document doc = config::parse_file(path);
        for (const std::string& ov : overrides)
            config::apply_override(doc, ov);
        if (!output_dir.empty())
            config::apply_override(doc, "scenario.output_dir=\"" + output_dir + "\"");
        else if (!doc.has("scenario", "output_dir"))
            config::apply_override(doc,
                                   "scenario.output_dir=\"" + default_output_dir() + "\"");
        configs.push_back(experiments::scenario_from_document(doc));
    }
    std::vector<experiments::RunManifest> manifests(configs.size());
    std::vector<int> codes(configs.size(), 0);
    std::mutex out_mutex;
    auto worker = [&](std::size_t idx) {
        try {
            manifests[idx] = experiments::run_scenario(configs[idx]);
            codes[idx] = manifest_exit(manifests[idx]);
        } catch (const ConfigError& e) {
            std::lock_guard<std::mutex> lock(out_mutex);
            std::cerr << "error: " << e.what() << '\n';
            codes[idx] = 2;
            return;
        } catch (const SolverError& e) {
            std::lock_guard<std::mutex> lock(out_mutex);
            std::cerr << "solver error: " << e.what() << '\n';
            codes[idx] = 3;
            return;
        }
        std::lock_guard<std::mutex> lock(out_mutex);
        print_manifest(manifests[idx]);
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i)
            worker(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex next_mutex;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t idx;
                    {
                        std::lock_guard<std::mutex> lock(next_mutex);
                        if (next >= configs.size())
                            return;
                        idx = next++;
                    }
                    worker(idx);
                }
            });
        for (std::thread& th : pool)
            th.join();
    }
    int worst = 0;
    for (int code : codes)
        worst = std::max(worst, code);
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "pparab " PPARAB_VERSION
        " - waiting-time laboratory for the degenerate p-parabolic equation u_t = "
        "Delta_p u, p > 2.\nScenario config schema: docs/scenario-config.md"};
    app.require_subcommand(1);

    // constants
    auto* constants = app.add_subcommand(
        "constants", "print k, q, hat_t, t2(0) and t2(0)/hat_t per exponent p");
    std::vector<double> const_ps{4.0};
    int const_n = 1;
    constants->add_option("--p", const_ps, "exponent list")->capture_default_str();
    constants->add_option("--n", const_n, "spatial dimension")->capture_default_str();

    // solve
    auto* solve = app.add_subcommand("solve", "bare solve, waterfall CSV output");
    CommonFlags solve_flags;
    add_common(solve, solve_flags);
    double solve_bc_right = 1.0;
    std::string solve_initial = "power-plus";
    solve->add_option("--bc-right", solve_bc_right, "right Dirichlet value")
        ->capture_default_str();
    solve->add_option("--initial", solve_initial,
                      "initial family: power-plus|barenblatt|constant")
        ->capture_default_str();

    // waiting-time
    auto* wt = app.add_subcommand("waiting-time",
                                  "flagship waiting-time run, report + bracket check");
    CommonFlags wt_flags;
    add_common(wt, wt_flags);
    double wt_threshold = tracker::kDefaultRelThreshold;
    wt->add_option("--threshold", wt_threshold,
                   "departure threshold relative to the running max")
        ->capture_default_str();

    // level-sets
    auto* levels = app.add_subcommand("level-sets", "level-set curves (fig3 outputs)");
    CommonFlags lv_flags;
    add_common(levels, lv_flags);
    std::vector<double> lv_levels{0.02, 0.05, 0.1};
    levels->add_option("--levels", lv_levels, "tracked level values")->capture_default_str();

    // profile
    auto* profile = app.add_subcommand(
        "profile", "edge profile with Barenblatt/initial references (fig4 outputs)");
    CommonFlags pf_flags;
    add_common(profile, pf_flags);

    // convergence
    auto* conv = app.add_subcommand("convergence",
                                    "Barenblatt exact-solution refinement study");
    CommonFlags cv_flags;
    cv_flags.n_cells = 100;
    add_common(conv, cv_flags);
    std::vector<int> cv_grids{100, 200, 400};
    conv->add_option("--grids", cv_grids, "cell counts of the study")->capture_default_str();

    // verify
    app.add_subcommand("verify", "run the full acceptance/property suite");

    // run
    auto* run = app.add_subcommand("run", "run scenario config files");
    std::vector<std::string> run_paths;
    std::vector<std::string> run_overrides;
    std::string run_output;
    int run_jobs = 1;
    run->add_option("configs", run_paths, "scenario config files")->required();
    run->add_option("--set", run_overrides, "override section.key=value");
    run->add_option("-o,--output-dir", run_output, "output directory override");
    run->add_option("--jobs", run_jobs, "parallel scenario execution")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints usage to stderr
        return 2;
    }

    try {
        if (constants->parsed())
            return cmd_constants(const_ps, const_n);
        if (solve->parsed()) {
            config::Document doc = experiments::builtin_document("fig2");
            config::apply_override(doc, "scenario.name=\"solve\"");
            config::apply_override(doc, "problem.bc_right=" + io::format_double(solve_bc_right));
            config::apply_override(doc, "problem.initial=\"" + solve_initial + "\"");
            apply_common(doc, solve_flags);
            const auto cfg = experiments::scenario_from_document(doc);
            const auto manifest = experiments::run_scenario(cfg);
            print_manifest(manifest);
            return manifest_exit(manifest);
        }
        if (wt->parsed()) {
            wt_flags.overrides.push_back("analyses.waiting_threshold=" +
                                         io::format_double(wt_threshold));
            return cmd_waiting_time(wt_flags);
        }
        if (levels->parsed()) {
            std::string arr = "analyses.levels=[";
            for (std::size_t i = 0; i < lv_levels.size(); ++i)
                arr += (i ? "," : "") + io::format_double(lv_levels[i]);
            lv_flags.overrides.push_back(arr + "]");
            return run_builtin("fig3", lv_flags);
        }
        if (profile->parsed())
            return run_builtin("fig4", pf_flags);
        if (conv->parsed()) {
            std::string arr = "analyses.convergence_grids=[";
            for (std::size_t i = 0; i < cv_grids.size(); ++i)
                arr += (i ? "," : "") + std::to_string(cv_grids[i]);
            cv_flags.overrides.push_back(arr + "]");
            return run_builtin("convergence", cv_flags);
        }
        if (app.get_subcommand("verify")->parsed())
            return cmd_verify();
        if (run->parsed())
            return cmd_run(run_paths, run_overrides, run_output, run_jobs);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
