#ifndef PPARAB_EXPERIMENTS_HPP
#define PPARAB_EXPERIMENTS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pparab/analytic.hpp"
#include "pparab/config.hpp"
#include "pparab/mol_solver.hpp"
#include "pparab/tracker.hpp"

/// Declarative scenario runner binding the analytic oracle, the solver and
/// the tracker into reproducible experiments with CSV outputs and a run
/// manifest.
namespace pparab::experiments {

/// Requested analyses of one scenario. A scenario runs its solve once and
/// feeds the trace to every enabled analysis.
struct Analyses {
    bool waterfall = false;
    bool level_sets = false;
    std::vector<double> levels{0.02, 0.05, 0.1}; ///< the support edge is always tracked too
    bool waiting_time = false;
    double waiting_threshold_rel = tracker::kDefaultRelThreshold;
    bool exponent_profile = false;
    std::vector<double> exponent_times;
    bool profile = false; ///< profile with shifted Barenblatt / initial references
    std::vector<double> profile_times;
    bool barrier_memory = false;
    double barrier_delta = std::numeric_limits<double>::quiet_NaN(); ///< NaN -> p/(p-2)
    double barrier_M = 1.0;
    double barrier_r = 1.0;
    bool barrier_bracket = false;
    bool convergence = false;
    std::vector<int> convergence_grids{100, 200, 400};
    bool comparison = false;
    std::string comparison_pair = "bump"; ///< "bump" | "barenblatt-below"
    double comparison_delta = 0.25;

    bool any() const {
        return waterfall || level_sets || waiting_time || exponent_profile || profile ||
               barrier_memory || barrier_bracket || convergence || comparison;
    }
};

struct ScenarioConfig {
    std::string name;
    solver::ProblemSpec problem;
    int snapshot_count = 400;
    std::vector<double> snapshot_times; ///< nonempty list wins over snapshot_count
    Analyses analyses;
    std::string output_dir = "out";
    std::string canonical_config; ///< canonical rendering used for the hash
};

/// Materialize a scenario from a parsed document; throws ConfigError on
/// schema violations. See docs/scenario-config.md for the schema.
ScenarioConfig scenario_from_document(const config::Document& doc);

/// Builtin scenario documents: fig2, fig3, fig4, flagship, convergence,
/// arrival. Throws ConfigError on an unknown name.
config::Document builtin_document(const std::string& name);
std::vector<std::string> builtin_names();

struct CheckOutcome {
    std::string name;
    bool pass = false;
    double metric = 0.0;
    std::string detail;
};

struct EmittedFile {
    std::string name; ///< relative to output_dir
    long rows = 0;
};

struct RunManifest {
    std::string scenario;
    std::string config_hash;
    std::string tool_version;
    double wall_seconds = 0.0;
    std::vector<EmittedFile> files;
    std::vector<CheckOutcome> checks;
    bool ok = false;
    std::string diagnostic;
};

/// Run the scenario: one solve, all analyses, CSV outputs plus manifest.txt
/// (written last). On a failure the partial data files are removed, a failed
/// manifest is written and the error is rethrown.
RunManifest run_scenario(const ScenarioConfig& cfg);

// --- direct check operations -------------------------------------------

struct BarrierCheckResult {
    bool pass = false;
    double max_violation = 0.0;
    double checked_up_to = 0.0; ///< min(hat_T/2, t_end)
    double hat_T = 0.0;
};

/// Domination of the trace by the rescaled separable supersolution
///   vbar(x,t) = M r^{-delta} (1 - t/hat_T)^{-1/(p-2)} |x-w|^delta
/// for t <= min(hat_T/2, t_end) and |x-w| <= r, slack 1e-6*M. The left
/// support edge of the initial data is used for w. Throws ConfigError when
/// the trace does not satisfy the hypotheses (data above the power bound or
/// u > M).
BarrierCheckResult barrier_check_memory(const Grid& grid, const solver::SolveTrace& trace,
                                        const PParams& params, double delta, double M,
                                        double r);

/// Waiting-time bracket [0.9 hat_t, 1.1 t2(0)].
bool barrier_check_bracket(const tracker::WaitingTimeReport& report, const PParams& params);

struct ConvergenceRow {
    int n_cells = 0;
    double max_err = 0.0;
    double l1_err = 0.0;
    double order_max = 0.0; ///< vs previous row; 0 for the first row
    double order_l1 = 0.0;
};

/// Exact-solution refinement study: reruns the problem on each grid and
/// compares the final snapshot against the analytic Barenblatt. Requires
/// Barenblatt initial data (amplitude 1), zero Dirichlet values and support
/// strictly inside the domain through the final time.
std::vector<ConvergenceRow> convergence_study(const ScenarioConfig& base,
                                              std::span<const int> grids);

struct ComparisonResult {
    bool pass = false;
    double max_violation = 0.0;
    double scale = 0.0;
};

/// Discrete comparison-principle check: lower/upper must share the grid, have
/// ordered Dirichlet values and pointwise-ordered initial data. Pass iff
/// max (u_lower - u_upper)_+ <= 1e-6 * scale over all snapshots and nodes.
ComparisonResult comparison_check(const solver::ProblemSpec& lower,
                                  const solver::ProblemSpec& upper,
                                  std::span<const double> snapshot_times);

/// The rescaled below-tangent Barenblatt of the upper-bound construction:
/// hat_U(xi, t) = (1/lambda) U(xi, lambda^{2-p} t + t1), centered at xi = 0.
double barrier_barenblatt_below(double xi, double t, const analytic::TangencyParameters& tp,
                                const PParams& params);

/// Problem whose initial data is hat_U(x - 1, 0) on (-1,1) with the matching
/// pinned Dirichlet value at x = 1 (hat_U(0,0) = epsilon).
solver::ProblemSpec barenblatt_below_problem(const PParams& params, double delta, int n_cells,
                                             double t_end);

struct ArrivalResult {
    std::optional<double> arrival_time; ///< support reaches the monitor point
    double expected_t2 = 0.0;           ///< analytic t2(delta)
};

/// First time the left support edge of the trace crosses monitor_x.
ArrivalResult support_arrival(const Grid& grid, const solver::SolveTrace& trace,
                              const PParams& params, double delta, double monitor_x,
                              double threshold);

/// Aitken-extrapolated limit of detected waiting times on successively
/// refined grids; falls back to the finest value when the differences do not
/// support extrapolation.
double richardson_waiting_time(std::span<const double> times);

} // namespace pparab::experiments

#endif
