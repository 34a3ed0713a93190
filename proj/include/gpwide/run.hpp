#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gpwide/config.hpp"
#include "gpwide/diagnostics.hpp"
#include "gpwide/io.hpp"
#include "gpwide/minimize.hpp"
#include "gpwide/parabolic.hpp"

namespace gpwide {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerics = 3;
inline constexpr int kExitIo = 4;

/// Wide-path grid for a given epsilon: horizon covering both the requested T
/// and the weighted tail tolerance, time step dt = dt_eps_ratio * eps.
inline Grid wide_grid_for(const ProblemSpec& spec, const RunOptions& opts, double eps) {
    const GrowthConstants& g = spec.growth;
    const double c = std::max({g.A2 + g.C2, g.H2, g.D2});
    const double t_max = std::max(opts.T, truncation_horizon(eps, c, opts.tail_tol));
    const int m = std::max(2, static_cast<int>(std::ceil(t_max / (opts.dt_eps_ratio * eps))));
    if (spec.domain.dims == 1) return Grid::make(spec.domain, opts.N, 0, t_max, m);
    return Grid::make(spec.domain, opts.N, opts.N, t_max, m);
}

namespace detail {

inline std::string plot_script(bool has_trajectory, int n_eps) {
    std::string s;
    s += "import matplotlib.pyplot as plt\n";
    s += "import numpy as np\n\n";
    s += "def load(path):\n";
    s += "    data = np.genfromtxt(path, delimiter=',', names=True)\n";
    s += "    return data\n\n";
    if (has_trajectory) {
        s += "traj = load('trajectory.csv')\n";
        s += "species = [c for c in traj.dtype.names if c.startswith('w_')]\n";
        s += "t_final = traj['t'].max()\n";
        s += "final = traj[traj['t'] == t_final]\n";
        s += "for c in species:\n";
        s += "    plt.plot(final['x'], final[c], label=c)\n";
        s += "plt.xlabel('x'); plt.legend(); plt.title(f'parabolic state at t={t_final:g}')\n";
        s += "plt.savefig('trajectory_final.png', dpi=150)\n";
        s += "plt.close()\n";
    }
    for (int i = 0; i < n_eps; ++i) {
        const std::string tag = std::to_string(i + 1);
        s += "energy = load('energy_eps_" + tag + ".csv')\n";
        s += "plt.semilogy(energy['t'], np.abs(energy['E']), label='|E|')\n";
        s += "plt.semilogy(energy['t'], np.abs(energy['I']), label='|I|')\n";
        s += "plt.xlabel('t'); plt.legend(); plt.title('energy traces, run " + tag + "')\n";
        s += "plt.savefig('energy_eps_" + tag + ".png', dpi=150)\n";
        s += "plt.close()\n";
    }
    return s;
}

}  // namespace detail

/// Executes the configured run and writes trajectory/field CSVs, the sorted
/// key = value report and a plotting script into out_dir. Output is
/// byte-stable across repeated runs on the same platform.
inline int run(const ProblemSpec& spec, const RunOptions& opts) {
    try {
        std::filesystem::create_directories(opts.out_dir);
    } catch (const std::exception& e) {
        throw IoError(std::string("cannot create output directory: ") + e.what());
    }
    const auto out_path = [&](const std::string& name) {
        return (std::filesystem::path(opts.out_dir) / name).string();
    };

    std::map<std::string, std::string> report;
    report["mode"] = RunOptions::mode_name(opts.mode);
    report["epsilon_bar"] = format_g17(epsilon_bar(spec.growth));
    report["k"] = std::to_string(spec.k);

    const bool wants_parabolic =
        opts.mode == RunOptions::Mode::Parabolic || opts.mode == RunOptions::Mode::Both;
    const bool wants_wide =
        opts.mode == RunOptions::Mode::Wide || opts.mode == RunOptions::Mode::Both;

    Trajectory traj;
    if (wants_parabolic) {
        if (spec.domain.dims != 1)
            throw NumericsError("the parabolic path supports one-dimensional domains only");
        const Grid grid = Grid::make(spec.domain, opts.N, 0, opts.T, 2);
        ParabolicOptions popts;
        popts.theta = opts.theta;
        popts.record_stride = opts.record_stride;
        traj = solve_parabolic(spec, opts.T, opts.dt, grid, popts);
        write_trajectory_csv(traj, out_path("trajectory.csv"));
        report["box_violation_max"] = format_g17(traj.box_violation_max);

        const BoundConstants bc = bound_constants(spec, grid);
        report["M1"] = format_g17(bc.M1);
        report["M2"] = format_g17(bc.M2);
        report["M3"] = format_g17(bc.M3);
        report["M_tilde1"] = format_g17(bc.M_tilde1);
        report["M_tilde2"] = format_g17(bc.M_tilde2);
        if (spec.mu && spec.D4) report["C_bar_T"] = format_g17(bc.C_bar(opts.T));

        const HolderResult hq = holder_quotient(traj);
        report["holder_sup"] = format_g17(hq.sup_quotient);
        report["holder_Chat"] = format_g17(hq.C_hat);

        const SegregationTrace seg = segregation_trace(traj, spec);
        report["S_initial"] = format_g17(seg.S.front());
        report["S_final"] = format_g17(seg.S.back());

        // interior window estimates on dyadic window starts inside the horizon
        int widx = 0;
        for (double T0 : {1.0, 2.0, 4.0, 8.0}) {
            if (T0 + opts.tau > traj.times.back() + 1e-12) break;
            for (int i = 0; i < spec.k; ++i) {
                const LemmaSqResult lr = lemma_sq_integral(traj, spec, i, T0, opts.tau, opts.delta);
                const std::string key = "window_" + std::to_string(T0) + "_species_" +
                                        std::to_string(i + 1);
                report[key + "_value"] = format_g17(lr.value);
                report[key + "_bound"] = format_g17(lr.bound);
            }
            ++widx;
        }
        (void)widx;

        if (spec.b_lower && spec.mu_bar) {
            std::vector<double> starts;
            for (double T0 = 1.0; T0 + 1.0 <= traj.times.back() + 1e-12; T0 *= 2.0)
                starts.push_back(T0);
            const auto windows = windowed_segregation(traj, spec, opts.delta, 1.0, starts);
            for (const auto& w : windows) {
                const std::string key = "seg_window_" + std::to_string(w.T);
                report[key + "_avg_S"] = format_g17(w.avg_S);
                report[key + "_avg_S_beta"] = format_g17(w.avg_S_beta);
                report[key + "_bound"] = format_g17(w.bound);
            }
        }
    }

    std::vector<MinimizeResult> runs;
    if (wants_wide) {
        MinimizeOptions mopts;
        mopts.max_iters = opts.max_iters;
        mopts.grad_tol = opts.tol;
        runs = continuation_in_eps(
            spec, [&](double eps) { return wide_grid_for(spec, opts, eps); }, opts.eps_list,
            mopts);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const std::string tag = std::to_string(i + 1);
            write_field_csv(runs[i].v, runs[i].grid, out_path("field_eps_" + tag + ".csv"));
            const EnergyReport er = energy_traces(runs[i].v, spec, runs[i].grid, runs[i].eps);
            write_energy_csv(er, runs[i].grid, out_path("energy_eps_" + tag + ".csv"));
            report["eps_" + tag] = format_g17(runs[i].eps);
            report["F_eps_" + tag] = format_g17(runs[i].F_value);
            report["converged_" + tag] = runs[i].converged ? "true" : "false";
            report["iters_" + tag] = std::to_string(runs[i].iters);
            report["E0_" + tag] = format_g17(er.E.front());
        }
        report["F_eps"] = format_g17(runs.back().F_value);
        const BoundConstants bc = bound_constants(spec, runs.back().grid);
        report["M1"] = format_g17(bc.M1);
        report["M2"] = format_g17(bc.M2);
        report["M3"] = format_g17(bc.M3);
        report["M_tilde1"] = format_g17(bc.M_tilde1);
        report["M_tilde2"] = format_g17(bc.M_tilde2);
        if (spec.mu && spec.D4) report["C_bar_T"] = format_g17(bc.C_bar(opts.T));
    }

    if (opts.mode == RunOptions::Mode::Both) {
        const std::vector<double> distances = compare_wide_vs_parabolic(runs, traj, opts.T);
        for (std::size_t i = 0; i < distances.size(); ++i)
            report["delta_" + std::to_string(i + 1)] = format_g17(distances[i]);
    }

    write_report(report, out_path("report.txt"));

    std::ofstream plot(out_path("plot.py"), std::ios::binary);
    if (!plot) throw IoError("cannot write plot script");
    plot << detail::plot_script(wants_parabolic, wants_wide ? static_cast<int>(runs.size()) : 0);

    return kExitOk;
}

}  // namespace gpwide
