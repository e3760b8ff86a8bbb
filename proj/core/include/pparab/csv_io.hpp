#ifndef PPARAB_CSV_IO_HPP
#define PPARAB_CSV_IO_HPP

#include <string>
#include <vector>

#include "pparab/grid.hpp"
#include "pparab/mol_solver.hpp"
#include "pparab/tracker.hpp"

/// Writers for the on-disk contract: CSV files with 17-significant-digit
/// numbers and flat key=value reports. Every writer returns the number of
/// data rows written (excluding the header).
namespace pparab::io {

/// "%.17g" rendering, the round-trip-exact default for all numeric output.
std::string format_double(double v);

/// Long-format trace: header "t,x,u", one row per (snapshot, node).
long write_trace_csv(const std::string& path, const Grid& grid,
                     const solver::SolveTrace& trace);

/// Integrator statistics as key=value lines.
long write_stats_kv(const std::string& path, const solver::SolveStats& stats);

/// Level tracks: header "t,gamma,method", method in {ode, root}.
long write_level_tracks_csv(const std::string& path,
                            const std::vector<tracker::LevelSetTracks>& tracks,
                            const std::vector<tracker::LevelTrack>& edge_tracks = {});

/// Exponent fits: header "t,edge,exponent,r2".
long write_exponent_csv(const std::string& path,
                        const std::vector<tracker::ExponentFit>& fits);

/// Waiting-time report as key=value lines.
long write_waiting_time_kv(const std::string& path, const tracker::WaitingTimeReport& report);

/// Profile table with arbitrary named columns, first column x.
long write_profile_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns);

/// FNV-1a 64-bit over a string, rendered as 16 hex digits. Used for the
/// config hash in run manifests.
std::string fnv1a_hex(const std::string& text);

} // namespace pparab::io

#endif
