#include "pparab/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pparab/analytic.hpp"

namespace pparab::tracker {

namespace {

/// Nodal derivative samples built with the same central stencils as the MOL
/// right-hand side; boundary nodes carry one-sided copies of their neighbors
/// so interpolation near the ends stays usable.
struct NodalDerivatives {
    std::vector<double> ux;
    std::vector<double> uxx;
};

NodalDerivatives node_derivatives(const Grid& grid, const GridState& state) {
    const std::size_t nn = state.values.size();
    NodalDerivatives d;
    d.ux.assign(nn, 0.0);
    d.uxx.assign(nn, 0.0);
    const double inv2dx = 1.0 / (2.0 * grid.dx);
    const double invdx2 = 1.0 / (grid.dx * grid.dx);
    const double* u = state.values.data();
    for (std::size_t i = 1; i + 1 < nn; ++i) {
        d.ux[i] = (u[i + 1] - u[i - 1]) * inv2dx;
        d.uxx[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invdx2;
    }
    if (nn >= 3) {
        d.ux.front() = d.ux[1];
        d.uxx.front() = d.uxx[1];
        d.ux.back() = d.ux[nn - 2];
        d.uxx.back() = d.uxx[nn - 2];
    }
    return d;
}

double interp_nodal(const Grid& grid, const std::vector<double>& f, double x) {
    const double s = (x - grid.x_left) / grid.dx;
    int j = static_cast<int>(std::floor(s));
    j = std::clamp(j, 0, grid.n_cells - 1);
    const double w = s - j;
    return (1.0 - w) * f[static_cast<std::size_t>(j)] +
           w * f[static_cast<std::size_t>(j + 1)];
}

} // namespace

std::optional<double> detect_support_edge(const Grid& grid, const GridState& state,
                                          double threshold) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("detect_support_edge: require threshold > 0");
    const std::vector<double>& u = state.values;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > threshold) {
            if (i == 0)
                return grid.x_left;
            const double x0 = grid.node(static_cast<int>(i) - 1);
            const double frac = (threshold - u[i - 1]) / (u[i] - u[i - 1]);
            return x0 + frac * grid.dx;
        }
    }
    return std::nullopt;
}

LevelSetTracks track_level_set(const Grid& grid, const solver::SolveTrace& trace,
                               const PParams& params, double level, double gamma0,
                               double ux_floor) {
    if (!(level > 0.0))
        throw std::invalid_argument("track_level_set: require level > 0 "
                                    "(the edge is handled by detect_support_edge)");
    if (trace.snapshots.empty())
        throw std::invalid_argument("track_level_set: empty trace");
    const GridState& first = trace.snapshots.front();
    const double u0_at_g0 =
        interp_nodal(grid, first.values, gamma0);
    if (std::fabs(u0_at_g0 - level) > 0.05 * std::max(level, 1e-30) + 1e-12)
        throw std::invalid_argument("track_level_set: gamma0 does not sit on the level");

    LevelSetTracks tracks;
    tracks.ode.level = level;
    tracks.root.level = level;

    // --- interface ODE, explicit Euler over the snapshot times
    {
        double g = gamma0;
        tracks.ode.times.push_back(first.t);
        tracks.ode.positions.push_back(g);
        for (std::size_t j = 0; j + 1 < trace.snapshots.size(); ++j) {
            const GridState& snap = trace.snapshots[j];
            const NodalDerivatives d = node_derivatives(grid, snap);
            const double ux = interp_nodal(grid, d.ux, g);
            const double uxx = interp_nodal(grid, d.uxx, g);
            if (std::fabs(ux) < ux_floor) {
                tracks.ode.terminated = true;
                tracks.ode.termination_reason = "degenerate gradient";
                break;
            }
            const double gdot = -(params.p - 1.0) * pow_abs(ux, params.p - 3.0) *
                                (ux > 0.0 ? 1.0 : -1.0) * uxx;
            const double dt = trace.snapshots[j + 1].t - snap.t;
            g += dt * gdot;
            if (g < grid.x_left || g > grid.x_right) {
                tracks.ode.terminated = true;
                tracks.ode.termination_reason = "left domain";
                break;
            }
            tracks.ode.times.push_back(trace.snapshots[j + 1].t);
            tracks.ode.positions.push_back(g);
        }
    }

    // --- direct root tracking: nearest sign change of u - level around the
    //     previous position, outward cell-by-cell
    {
        double g = gamma0;
        tracks.root.times.push_back(first.t);
        tracks.root.positions.push_back(g);
        for (std::size_t j = 1; j < trace.snapshots.size(); ++j) {
            const std::vector<double>& u = trace.snapshots[j].values;
            const int nc = grid.n_cells;
            int base = static_cast<int>(std::floor((g - grid.x_left) / grid.dx));
            base = std::clamp(base, 0, nc - 1);
            int found = -1;
            for (int off = 0; off < nc && found < 0; ++off) {
                for (int cell : {base - off, base + off}) {
                    if (cell < 0 || cell >= nc)
                        continue;
                    const double a = u[static_cast<std::size_t>(cell)] - level;
                    const double b = u[static_cast<std::size_t>(cell) + 1] - level;
                    if (a == 0.0 && b == 0.0)
                        continue;
                    if (a * b <= 0.0) {
                        found = cell;
                        break;
                    }
                }
            }
            if (found < 0) {
                tracks.root.terminated = true;
                tracks.root.termination_reason = "lost bracket";
                break;
            }
            const double a = u[static_cast<std::size_t>(found)] - level;
            const double b = u[static_cast<std::size_t>(found) + 1] - level;
            const double frac = (a == b) ? 0.0 : a / (a - b);
            g = grid.node(found) + frac * grid.dx;
            tracks.root.times.push_back(trace.snapshots[j].t);
            tracks.root.positions.push_back(g);
        }
    }
    return tracks;
}

WaitingTimeReport waiting_time(const Grid& grid, const solver::SolveTrace& trace,
                               const PParams& params, double monitor_x, double threshold) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("waiting_time: require threshold > 0");
    if (trace.snapshots.empty())
        throw std::invalid_argument("waiting_time: empty trace");
    WaitingTimeReport report;
    int node = static_cast<int>(std::lround((monitor_x - grid.x_left) / grid.dx));
    node = std::clamp(node, 0, grid.n_cells);
    report.monitor_x = grid.node(node);
    report.threshold = threshold;
    report.grid_n = grid.n_cells;
    report.bracket_lower = analytic::critical_time_1d(params);
    report.bracket_upper = analytic::barrier_upper_time_limit(params);

    double prev_t = trace.snapshots.front().t;
    double prev_v = trace.snapshots.front().values[static_cast<std::size_t>(node)];
    for (std::size_t j = 0; j < trace.snapshots.size(); ++j) {
        const double t = trace.snapshots[j].t;
        const double v = trace.snapshots[j].values[static_cast<std::size_t>(node)];
        if (v > threshold) {
            if (j == 0) {
                report.detected_time = t;
            } else {
                const double frac = (threshold - prev_v) / (v - prev_v);
                report.detected_time = prev_t + frac * (t - prev_t);
            }
            return report;
        }
        prev_t = t;
        prev_v = v;
    }
    return report; // never exceeded -> detected_time stays empty
}

ExponentFit local_exponent(const Grid& grid, const GridState& state, double edge,
                           int window_cells, int skip_cells) {
    if (window_cells < 4)
        throw std::invalid_argument("local_exponent: need a window of >= 4 nodes");
    if (skip_cells < 0)
        throw std::invalid_argument("local_exponent: skip_cells must be >= 0");
    // first node strictly inside the support beyond the edge
    int i0 = static_cast<int>(std::ceil((edge - grid.x_left) / grid.dx));
    if (grid.node(i0) <= edge)
        ++i0;
    i0 += skip_cells;
    const int i1 = i0 + window_cells - 1;
    if (i0 < 0 || i1 > grid.n_cells)
        throw std::invalid_argument("local_exponent: window leaves the grid");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<double> lx, ly;
    lx.reserve(static_cast<std::size_t>(window_cells));
    ly.reserve(static_cast<std::size_t>(window_cells));
    for (int i = i0; i <= i1; ++i) {
        const double u = state.values[static_cast<std::size_t>(i)];
        if (!(u > 0.0))
            throw std::invalid_argument("local_exponent: nonpositive u in fit window");
        const double X = std::log(grid.node(i) - edge);
        const double Y = std::log(u);
        lx.push_back(X);
        ly.push_back(Y);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
    }
    const double m = static_cast<double>(window_cells);
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0)
        throw std::invalid_argument("local_exponent: degenerate abscissae");
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;

    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / m;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        const double fit = intercept + slope * lx[j];
        ss_res += (ly[j] - fit) * (ly[j] - fit);
        ss_tot += (ly[j] - ybar) * (ly[j] - ybar);
    }
    ExponentFit out;
    out.time = state.t;
    out.edge_position = edge;
    out.window_lo = grid.node(i0);
    out.window_hi = grid.node(i1);
    out.exponent = slope;
    out.fit_quality = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return out;
}

} // namespace pparab::tracker
