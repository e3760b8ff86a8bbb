#ifndef PPARAB_TRACKER_HPP
#define PPARAB_TRACKER_HPP

#include <optional>
#include <string>
#include <vector>

#include "pparab/grid.hpp"
#include "pparab/mol_solver.hpp"
#include "pparab/params.hpp"

/// Free-boundary extraction from solve traces: support edges, level-set
/// curves via the interface ODE, waiting times and edge-exponent fits.
/// All functions are pure over immutable traces.
namespace pparab::tracker {

/// Relative support threshold and its absolute floor (u below the Newton
/// noise floor carries no support information).
constexpr double kDefaultRelThreshold = 1e-4;
constexpr double kDefaultAbsThreshold = 1e-10;

/// Leftmost boundary of {u > threshold} by linear interpolation between the
/// bracketing nodes; nullopt if u <= threshold everywhere.
std::optional<double> detect_support_edge(const Grid& grid, const GridState& state,
                                          double threshold);

struct LevelTrack {
    double level = 0.0;
    std::vector<double> times;
    std::vector<double> positions;
    bool terminated = false;          ///< track ended before the last snapshot
    std::string termination_reason;   ///< "left domain" | "degenerate gradient" | "lost bracket"
};

/// The interface ODE gamma' = -(p-1)|u_x|^{p-3} sign(u_x) u_xx integrated by
/// explicit Euler on the snapshot grid (ode), cross-validated by direct root
/// tracking of u = level near the previous position (root).
struct LevelSetTracks {
    LevelTrack ode;
    LevelTrack root;
};

LevelSetTracks track_level_set(const Grid& grid, const solver::SolveTrace& trace,
                               const PParams& params, double level, double gamma0,
                               double ux_floor = 1e-8);

struct WaitingTimeReport {
    double monitor_x = 0.0;           ///< snapped to the nearest grid node
    double threshold = 0.0;
    std::optional<double> detected_time;
    double bracket_lower = 0.0;       ///< analytic hat_t
    double bracket_upper = 0.0;       ///< analytic t2(0)
    int grid_n = 0;
};

/// First departure of u(monitor_x, .) above threshold, refined by linear
/// interpolation in t between the straddling snapshots.
WaitingTimeReport waiting_time(const Grid& grid, const solver::SolveTrace& trace,
                               const PParams& params, double monitor_x, double threshold);

struct ExponentFit {
    double time = 0.0;
    double edge_position = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double exponent = 0.0;
    double fit_quality = 0.0; ///< coefficient of determination in [0,1]
};

/// Least-squares slope of log u against log(x - edge) over window_cells nodes
/// starting skip_cells nodes inside the edge. Throws std::invalid_argument on
/// fewer than 4 usable nodes or nonpositive u in the window.
ExponentFit local_exponent(const Grid& grid, const GridState& state, double edge,
                           int window_cells, int skip_cells = 3);

} // namespace pparab::tracker

#endif
