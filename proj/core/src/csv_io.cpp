#include "pparab/csv_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "pparab/errors.hpp"

namespace pparab::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open for writing: " + path);
    return out;
}

} // namespace

long write_trace_csv(const std::string& path, const Grid& grid,
                     const solver::SolveTrace& trace) {
    std::ofstream out = open_or_throw(path);
    out << "t,x,u\n";
    long rows = 0;
    for (const GridState& snap : trace.snapshots) {
        const std::string ts = format_double(snap.t);
        for (int i = 0; i < grid.n_nodes(); ++i) {
            out << ts << ',' << format_double(grid.node(i)) << ','
                << format_double(snap.values[static_cast<std::size_t>(i)]) << '\n';
            ++rows;
        }
    }
    return rows;
}

long write_stats_kv(const std::string& path, const solver::SolveStats& stats) {
    std::ofstream out = open_or_throw(path);
    out << "steps_accepted=" << stats.steps_accepted << '\n'
        << "steps_rejected=" << stats.steps_rejected << '\n'
        << "newton_iters_total=" << stats.newton_iters_total << '\n'
        << "min_dt_used=" << format_double(stats.min_dt_used) << '\n'
        << "min_value_seen=" << format_double(stats.min_value_seen) << '\n';
    return 5;
}

long write_level_tracks_csv(const std::string& path,
                            const std::vector<tracker::LevelSetTracks>& tracks,
                            const std::vector<tracker::LevelTrack>& edge_tracks) {
    std::ofstream out = open_or_throw(path);
    out << "t,gamma,method\n";
    long rows = 0;
    auto emit = [&](const tracker::LevelTrack& tr, const char* method) {
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            out << format_double(tr.times[i]) << ',' << format_double(tr.positions[i])
                << ',' << method << '\n';
            ++rows;
        }
    };
    for (const tracker::LevelSetTracks& pair : tracks) {
        emit(pair.ode, "ode");
        emit(pair.root, "root");
    }
    for (const tracker::LevelTrack& tr : edge_tracks)
        emit(tr, "root");
    return rows;
}

long write_exponent_csv(const std::string& path,
                        const std::vector<tracker::ExponentFit>& fits) {
    std::ofstream out = open_or_throw(path);
    out << "t,edge,exponent,r2\n";
    long rows = 0;
    for (const tracker::ExponentFit& f : fits) {
        out << format_double(f.time) << ',' << format_double(f.edge_position) << ','
            << format_double(f.exponent) << ',' << format_double(f.fit_quality) << '\n';
        ++rows;
    }
    return rows;
}

long write_waiting_time_kv(const std::string& path,
                           const tracker::WaitingTimeReport& report) {
    std::ofstream out = open_or_throw(path);
    out << "monitor_x=" << format_double(report.monitor_x) << '\n'
        << "threshold=" << format_double(report.threshold) << '\n'
        << "detected_time="
        << (report.detected_time ? format_double(*report.detected_time) : std::string("none"))
        << '\n'
        << "bracket_lower=" << format_double(report.bracket_lower) << '\n'
        << "bracket_upper=" << format_double(report.bracket_upper) << '\n'
        << "grid_n=" << report.grid_n << '\n';
    return 6;
}

long write_profile_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size() || columns.empty())
        throw std::invalid_argument("write_profile_csv: names/columns mismatch");
    const std::size_t rows = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows)
            throw std::invalid_argument("write_profile_csv: ragged columns");
    std::ofstream out = open_or_throw(path);
    for (std::size_t j = 0; j < names.size(); ++j)
        out << names[j] << (j + 1 < names.size() ? ',' : '\n');
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << format_double(columns[j][i]) << (j + 1 < columns.size() ? ',' : '\n');
    return static_cast<long>(rows);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace pparab::io
