#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpwide/functional.hpp"
#include "gpwide/grid.hpp"
#include "gpwide/minimize.hpp"
#include "gpwide/parabolic.hpp"

namespace gpwide {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits: exact binary round-trip for doubles, and the same
/// bytes on every run.
inline std::string format_g17(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, buf + len);
}

/// CSV with columns t, x, w_1, ..., w_k; one row per (time node, space node),
/// time-major.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "t,x";
    for (int i = 0; i < traj.k; ++i) out << ",w_" << (i + 1);
    out << "\n";
    for (std::size_t snap = 0; snap < traj.times.size(); ++snap) {
        for (int j = 0; j < traj.nodes(); ++j) {
            out << format_g17(traj.times[snap]) << ',' << format_g17(traj.x_node(j));
            for (int i = 0; i < traj.k; ++i) out << ',' << format_g17(traj.state(snap, i, j));
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Reads back a trajectory CSV written by write_trajectory_csv.
inline Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trajectory file '" + path + "'");
    int k = 0;
    for (std::size_t pos = 0; (pos = line.find(",w_", pos)) != std::string::npos; ++pos) ++k;
    if (k == 0) throw IoError("malformed trajectory header in '" + path + "'");

    std::vector<double> times;
    std::vector<double> xs;
    std::vector<std::vector<double>> rows;  // per row: k values
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != static_cast<std::size_t>(k) + 2)
            throw IoError("malformed trajectory row in '" + path + "'");
        if (times.empty() || vals[0] != times.back()) times.push_back(vals[0]);
        if (times.size() == 1) xs.push_back(vals[1]);
        rows.emplace_back(vals.begin() + 2, vals.end());
    }
    if (xs.size() < 2 || rows.size() != times.size() * xs.size())
        throw IoError("inconsistent trajectory layout in '" + path + "'");

    Trajectory traj;
    traj.k = k;
    traj.n_cells = static_cast<int>(xs.size()) - 1;
    traj.x_lo = xs.front();
    traj.x_hi = xs.back();
    traj.times = times;
    traj.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    const int ns = traj.nodes();
    for (std::size_t snap = 0; snap < times.size(); ++snap) {
        std::vector<double> state(static_cast<std::size_t>(k) * ns);
        for (int j = 0; j < ns; ++j)
            for (int i = 0; i < k; ++i)
                state[static_cast<std::size_t>(i) * ns + j] = rows[snap * ns + j][i];
        traj.states.push_back(std::move(state));
    }
    return traj;
}

/// Minimizer field in the same layout as a trajectory CSV (t, x[, y], w_i).
inline void write_field_csv(const SpaceTimeField& v, const Grid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "t,x";
    if (grid.dims() == 2) out << ",y";
    for (int i = 0; i < v.species(); ++i) out << ",w_" << (i + 1);
    out << "\n";
    for (int n = 0; n < v.time_nodes(); ++n)
        for (int j = 0; j < grid.num_nodes(); ++j) {
            const Point p = grid.node_point(j);
            out << format_g17(grid.time_node(n)) << ',' << format_g17(p.x);
            if (grid.dims() == 2) out << ',' << format_g17(p.y);
            for (int i = 0; i < v.species(); ++i) out << ',' << format_g17(v.at(i, n, j));
            out << "\n";
        }
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Energy traces as CSV columns t, I, R, E, Q, ode_residual.
inline void write_energy_csv(const EnergyReport& rep, const Grid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "t,I,R,E,Q,ode_residual\n";
    for (std::size_t n = 0; n < rep.I.size(); ++n) {
        out << format_g17(grid.time_node(static_cast<int>(n))) << ',' << format_g17(rep.I[n])
            << ',' << format_g17(rep.R[n]) << ',' << format_g17(rep.E[n]) << ','
            << format_g17(rep.Q[n]) << ',' << format_g17(rep.ode_residual[n]) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// key = value lines, keys sorted lexicographically.
inline void write_report(const std::map<std::string, std::string>& entries,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace gpwide
