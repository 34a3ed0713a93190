#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpwide/grid.hpp"
#include "gpwide/minimize.hpp"
#include "gpwide/problem.hpp"

namespace gpwide {

/// Time-stepped solution of the limit parabolic system on a 1D grid.
/// `states` holds the recorded snapshots (k * (N+1) values each, species
/// major); `dt` is the step actually taken between consecutive solves, which
/// may be finer than the recording stride.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    double dt = 0.0;
    int k = 0;
    int n_cells = 0;       // spatial cells; nodes = n_cells + 1
    double x_lo = 0.0, x_hi = 1.0;
    double box_violation_max = 0.0;

    int nodes() const { return n_cells + 1; }
    double h() const { return (x_hi - x_lo) / n_cells; }
    double x_node(int j) const { return x_lo + h() * j; }
    double state(int snap, int i, int j) const {
        return states[snap][static_cast<std::size_t>(i) * nodes() + j];
    }
};

namespace detail {

/// Thomas elimination; the assembled systems are strictly diagonally
/// dominant, so pivots never vanish.
inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs,
                              std::vector<double>& out) {
    const std::size_t n = diag.size();
    for (std::size_t j = 1; j < n; ++j) {
        const double w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    out.resize(n);
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) out[j] = (rhs[j] - upper[j] * out[j + 1]) / diag[j];
}

}  // namespace detail

struct ParabolicOptions {
    /// Diffusion time weighting: theta = 1 is the fully implicit form
    ///   (r/dt - d(t_{n+1}) Lap) w' = (r/dt) w + f(t_n,x,w) - beta w sum a w^2,
    /// theta = 1/2 adds the explicit half of the Laplacian to the right-hand
    /// side (trapezoidal diffusion, used by default for its accuracy; the
    /// reaction and competition terms stay explicit at t_n either way).
    double theta = 0.5;
    /// Record every `record_stride`-th step (the final state is always kept).
    int record_stride = 1;
};

/// One IMEX step: implicit (theta-weighted) diffusion, explicit reaction and
/// competition, one tridiagonal solve per species. Boundary rows enforce g
/// under dirichlet_trace and a conservative half-cell Neumann closure in free
/// mode. No clamping inside the step; the clamped reaction extension applies.
inline std::vector<double> imex_step(const std::vector<double>& state, double t_n, double dt,
                                     const ProblemSpec& spec, const Grid& grid,
                                     double theta = 1.0) {
    if (grid.dims() != 1)
        throw std::invalid_argument("imex_step: the parabolic path is one-dimensional");
    if (!(dt > 0.0)) throw std::invalid_argument("imex_step: dt must be positive");
    const int k = spec.k;
    const int ns = grid.num_nodes();
    if (state.size() != static_cast<std::size_t>(k) * ns)
        throw std::invalid_argument("imex_step: state size mismatch");
    const double h = grid.hx();
    const bool dirichlet = spec.boundary_mode == BoundaryMode::DirichletTrace;

    std::vector<double> next(state.size());
    std::vector<double> lower(ns), diag(ns), upper(ns), rhs(ns), sol;
    for (int i = 0; i < k; ++i) {
        const double d0 = spec.eval_d(i, t_n);
        const double d1 = spec.eval_d(i, t_n + dt);
        const double* w = state.data() + static_cast<std::size_t>(i) * ns;
        for (int j = 0; j < ns; ++j) {
            const Point p = grid.node_point(j);
            const double r = spec.eval_r(i, p);
            double competition = 0.0;
            for (int q = 0; q < k; ++q)
                if (q != i) {
                    const double wq = state[static_cast<std::size_t>(q) * ns + j];
                    competition += spec.eval_a(i, q, t_n, p) * wq * wq;
                }
            const double react = spec.eval_f(i, t_n, p, w[j]) -
                                 spec.eval_beta(t_n, p) * w[j] * competition;

            if (j == 0 || j == ns - 1) {
                if (dirichlet) {
                    lower[j] = 0.0;
                    upper[j] = 0.0;
                    diag[j] = 1.0;
                    rhs[j] = w[j];  // g is the trace of v0, already on the state
                    continue;
                }
                // conservative half-cell closure: flux through the wall is zero
                const int inward = j == 0 ? 1 : -1;
                const double lap = 2.0 * (w[j + inward] - w[j]) / (h * h);
                diag[j] = r / dt + theta * d1 * 2.0 / (h * h);
                if (j == 0) {
                    upper[j] = -theta * d1 * 2.0 / (h * h);
                    lower[j] = 0.0;
                } else {
                    lower[j] = -theta * d1 * 2.0 / (h * h);
                    upper[j] = 0.0;
                }
                rhs[j] = r / dt * w[j] + (1.0 - theta) * d0 * lap + react;
                continue;
            }
            const double lap = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h);
            lower[j] = -theta * d1 / (h * h);
            upper[j] = -theta * d1 / (h * h);
            diag[j] = r / dt + theta * d1 * 2.0 / (h * h);
            rhs[j] = r / dt * w[j] + (1.0 - theta) * d0 * lap + react;
        }
        detail::solve_tridiagonal(lower, diag, upper, rhs, sol);
        std::copy(sol.begin(), sol.end(), next.begin() + static_cast<std::size_t>(i) * ns);
    }
    return next;
}

/// Repeated imex_step over [0, T]; records the max box violation per step.
inline Trajectory solve_parabolic(const ProblemSpec& spec, double T, double dt, const Grid& grid,
                                  const ParabolicOptions& opts = {}) {
    if (grid.dims() != 1)
        throw std::invalid_argument("solve_parabolic: the parabolic path is one-dimensional");
    if (T < 0.0 || (T > 0.0 && !(dt > 0.0)))
        throw std::invalid_argument("solve_parabolic: need T >= 0 and dt > 0");
    if (opts.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
    spec.check_shape();

    const int ns = grid.num_nodes();
    Trajectory traj;
    traj.dt = dt;
    traj.k = spec.k;
    traj.n_cells = grid.nx();
    traj.x_lo = grid.domain().x_lo;
    traj.x_hi = grid.domain().x_hi;

    const auto v0 = spec.sample_v0(grid);
    std::vector<double> state(static_cast<std::size_t>(spec.k) * ns);
    for (int i = 0; i < spec.k; ++i)
        std::copy(v0[i].begin(), v0[i].end(), state.begin() + static_cast<std::size_t>(i) * ns);
    traj.times.push_back(0.0);
    traj.states.push_back(state);

    const int steps = T > 0.0 ? static_cast<int>(std::llround(T / dt)) : 0;
    for (int n = 0; n < steps; ++n) {
        state = imex_step(state, n * dt, dt, spec, grid, opts.theta);
        for (double u : state) {
            const double viol = std::max(u - 1.0, -u);
            if (viol > traj.box_violation_max) traj.box_violation_max = viol;
        }
        if ((n + 1) % opts.record_stride == 0 || n + 1 == steps) {
            traj.times.push_back((n + 1) * dt);
            traj.states.push_back(state);
        }
    }
    return traj;
}

/// L2(Omega x (0,T)) distances between minimizer fields and the parabolic
/// trajectory, both interpolated onto the trajectory's recorded lattice;
/// trapezoid quadrature in both axes.
inline std::vector<double> compare_wide_vs_parabolic(const std::vector<MinimizeResult>& runs,
                                                     const Trajectory& traj, double T) {
    if (traj.times.empty() || traj.times.back() + 1e-12 < T)
        throw std::invalid_argument("trajectory does not reach the comparison horizon");
    for (const auto& run : runs)
        if (run.grid.t_max() + 1e-12 < T)
            throw std::invalid_argument("comparison horizon exceeds a run's T_max");

    const double h = traj.h();
    std::vector<double> distances;
    distances.reserve(runs.size());
    for (const auto& run : runs) {
        if (run.v.species() != traj.k)
            throw std::invalid_argument("species count mismatch in comparison");
        std::vector<double> space_norm;  // per recorded time within [0, T]
        std::vector<double> times;
        for (std::size_t snap = 0; snap < traj.times.size(); ++snap) {
            const double t = traj.times[snap];
            if (t > T + 1e-12) break;
            double acc = 0.0;
            for (int j = 0; j < traj.nodes(); ++j) {
                const double x = traj.x_node(j);
                const double tw = (j == 0 || j == traj.n_cells) ? 0.5 * h : h;
                // bilinear sample of the run's field at (t, x)
                const double pt = std::clamp(t / run.grid.dt(), 0.0, static_cast<double>(run.grid.m()));
                const int n0 = std::min(static_cast<int>(pt), run.grid.m() - 1);
                const double ft = pt - n0;
                const double px = std::clamp((x - run.grid.domain().x_lo) / run.grid.hx(), 0.0,
                                             static_cast<double>(run.grid.nx()));
                const int j0 = std::min(static_cast<int>(px), run.grid.nx() - 1);
                const double fx = px - j0;
                for (int i = 0; i < traj.k; ++i) {
                    const double a = (1 - fx) * run.v.at(i, n0, j0) + fx * run.v.at(i, n0, j0 + 1);
                    const double b =
                        (1 - fx) * run.v.at(i, n0 + 1, j0) + fx * run.v.at(i, n0 + 1, j0 + 1);
                    const double vi = (1 - ft) * a + ft * b;
                    const double diff = vi - traj.state(snap, i, j);
                    acc += tw * diff * diff;
                }
            }
            times.push_back(t);
            space_norm.push_back(acc);
        }
        double sq = 0.0;
        for (std::size_t s = 1; s < times.size(); ++s)
            sq += 0.5 * (space_norm[s] + space_norm[s - 1]) * (times[s] - times[s - 1]);
        distances.push_back(std::sqrt(sq));
    }
    return distances;
}

}  // namespace gpwide
