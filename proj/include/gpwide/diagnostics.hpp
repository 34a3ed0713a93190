#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpwide/grid.hpp"
#include "gpwide/parabolic.hpp"
#include "gpwide/problem.hpp"

namespace gpwide {

/// Inputs of the horizon-dependent estimate constant: C bounds |F_eps| at
/// minimizers, the rest enter the Gronwall chain.
struct CBarInputs {
    double C = 0.0;
    double D3 = 0.0;
    double R1 = 1.0;
    double omega = 1.0;  // |Omega|
    int k = 2;
    std::optional<double> mu;
    std::optional<double> D4;
};

/// Closed-form constants of the existence and uniform-estimate chains.
struct BoundConstants {
    double M1 = 0.0;        // 4 k H1 ||U2||
    double M2 = 0.0;        // 2 (D1 ||grad v0||^2 + 2 k H1 ||U2|| + k^2 C1 A1 ||U1U3|| / 2)
    double M3 = 0.0;        // M1 + M2
    double M_tilde1 = 0.0;  // 4 (D3+1) k H1 ||U2|| + 2 k^2 C1 A1 ||U3U1||
    double M_tilde2 = 1.0;  // A2 + C2 + H2 + 1
    CBarInputs C_bar_inputs;

    double c_tilde(double T) const {
        return 0.5 * (C_bar_inputs.C + M_tilde1 + M_tilde1 / M_tilde2) *
               std::exp((M_tilde2 + C_bar_inputs.D3) * T);
    }
    double c_tilde_tilde(double T) const {
        const double D3 = C_bar_inputs.D3;
        return (1.0 + D3) * (C_bar_inputs.C + M_tilde1 / M_tilde2) / (M_tilde2 + D3) *
                   std::exp((M_tilde2 + D3) * T) +
               2.0 * (M_tilde1 / M_tilde2) * std::exp(M_tilde2 * T) + c_tilde(T);
    }
    double C_bar(double T) const {
        return std::max({c_tilde(T) / C_bar_inputs.R1, c_tilde_tilde(T),
                         C_bar_inputs.k * C_bar_inputs.omega * T});
    }
};

/// The five closed-form constants, with ||grad v0||^2 taken as the discrete
/// forward-difference value on the given grid.
inline BoundConstants bound_constants(const ProblemSpec& spec, const Grid& grid) {
    spec.check_shape();
    const auto v0 = spec.sample_v0(grid);
    double grad_sq = 0.0;
    if (grid.dims() == 1) {
        const double h = grid.hx();
        for (int i = 0; i < spec.k; ++i)
            for (int c = 0; c < grid.nx(); ++c) {
                const double diff = (v0[i][c + 1] - v0[i][c]) / h;
                grad_sq += h * diff * diff;
            }
    } else {
        const int nx = grid.nx(), ny = grid.ny();
        const double hx = grid.hx(), hy = grid.hy();
        for (int i = 0; i < spec.k; ++i) {
            for (int jy = 0; jy <= ny; ++jy) {
                const double wy = ((jy == 0 || jy == ny) ? 0.5 : 1.0) * hy;
                for (int jx = 0; jx < nx; ++jx) {
                    const double diff =
                        (v0[i][jy * (nx + 1) + jx + 1] - v0[i][jy * (nx + 1) + jx]) / hx;
                    grad_sq += wy * hx * diff * diff;
                }
            }
            for (int jx = 0; jx <= nx; ++jx) {
                const double wx = ((jx == 0 || jx == nx) ? 0.5 : 1.0) * hx;
                for (int jy = 0; jy < ny; ++jy) {
                    const double diff =
                        (v0[i][(jy + 1) * (nx + 1) + jx] - v0[i][jy * (nx + 1) + jx]) / hy;
                    grad_sq += wx * hy * diff * diff;
                }
            }
        }
    }

    const GrowthConstants& gc = spec.growth;
    BoundConstants b;
    b.M1 = 4.0 * spec.k * gc.H1 * gc.norm_U2;
    b.M2 = 2.0 * (gc.D1 * grad_sq + 2.0 * spec.k * gc.H1 * gc.norm_U2 +
                  0.5 * spec.k * spec.k * gc.C1 * gc.A1 * gc.norm_U1U3);
    b.M3 = b.M1 + b.M2;
    b.M_tilde1 = 4.0 * (gc.D3 + 1.0) * spec.k * gc.H1 * gc.norm_U2 +
                 2.0 * spec.k * spec.k * gc.C1 * gc.A1 * gc.norm_U1U3;
    b.M_tilde2 = gc.A2 + gc.C2 + gc.H2 + 1.0;
    b.C_bar_inputs = CBarInputs{b.M3, gc.D3, gc.R1, spec.domain.measure(), spec.k, spec.mu, spec.D4};
    return b;
}

namespace detail {

/// Integral of the piecewise-linear interpolant of (xs, ys) over [a, b],
/// with [a, b] inside [xs.front(), xs.back()].
inline double integrate_pl(const std::vector<double>& xs, const std::vector<double>& ys, double a,
                           double b) {
    if (b <= a) return 0.0;
    double acc = 0.0;
    for (std::size_t s = 1; s < xs.size(); ++s) {
        const double lo = std::max(a, xs[s - 1]);
        const double hi = std::min(b, xs[s]);
        if (hi <= lo) continue;
        const double span = xs[s] - xs[s - 1];
        auto value_at = [&](double u) {
            const double f = (u - xs[s - 1]) / span;
            return (1 - f) * ys[s - 1] + f * ys[s];
        };
        acc += 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
    }
    return acc;
}

/// Spatial integral over [a, b] of a node-sampled function (piecewise linear)
/// on the trajectory lattice.
inline double integrate_nodes(const Trajectory& traj, const std::vector<double>& node_vals,
                              double a, double b) {
    std::vector<double> xs(traj.nodes());
    for (int j = 0; j < traj.nodes(); ++j) xs[j] = traj.x_node(j);
    return integrate_pl(xs, node_vals, a, b);
}

}  // namespace detail

struct LemmaSqResult {
    double value = 0.0;
    double bound = 0.0;
};

/// Closed-form window bound C_{delta,tau} = C_delta (1 + D1 tau + H1 ||U2|| tau),
/// valid when D2 = H2 = 0; C_delta = 2 R2 |Omega| + 4 ||grad gamma_delta||^2 + 2
/// with the piecewise-linear cutoff, ||grad gamma_delta||^2 = 4 / delta in 1D.
inline double lemma_sq_uniform_bound(const ProblemSpec& spec, double delta, double tau) {
    const double c_delta =
        2.0 * spec.growth.R2 * spec.domain.measure() + 4.0 * (4.0 / delta) + 2.0;
    return c_delta * (1.0 + spec.growth.D1 * tau + spec.growth.H1 * spec.growth.norm_U2 * tau);
}

/// Windowed interior estimate: value is the quadrature of
///   int_T^{T+tau} int_{Omega_delta} d_i |grad w_i|^2 + beta w_i^2 sum_{j!=i} a_ij w_j^2
/// on the trajectory, bound is C_delta (1 + int d_i dt + int int |f_i|).
inline LemmaSqResult lemma_sq_integral(const Trajectory& traj, const ProblemSpec& spec, int i,
                                       double T, double tau, double delta) {
    if (traj.times.empty() || T < traj.times.front() - 1e-12 ||
        T + tau > traj.times.back() + 1e-12)
        throw std::invalid_argument("lemma_sq_integral: window outside trajectory");
    const double half_width = 0.5 * (traj.x_hi - traj.x_lo);
    if (!(delta > 0.0) || delta >= half_width)
        throw std::invalid_argument("lemma_sq_integral: delta must lie in (0, half-width)");

    const double in_lo = traj.x_lo + delta;
    const double in_hi = traj.x_hi - delta;
    const double h = traj.h();

    std::vector<double> integrand(traj.times.size(), 0.0);
    std::vector<double> f_abs(traj.times.size(), 0.0);
    std::vector<double> cell_x(traj.n_cells + 1);
    for (int j = 0; j <= traj.n_cells; ++j) cell_x[j] = traj.x_node(j);

    for (std::size_t snap = 0; snap < traj.times.size(); ++snap) {
        const double t = traj.times[snap];
        const double di = spec.eval_d(i, t);

        // gradient part: cellwise-constant |grad w_i|^2 restricted to Omega_delta
        double grad_part = 0.0;
        for (int c = 0; c < traj.n_cells; ++c) {
            const double lo = std::max(in_lo, cell_x[c]);
            const double hi = std::min(in_hi, cell_x[c + 1]);
            if (hi <= lo) continue;
            const double diff = (traj.state(snap, i, c + 1) - traj.state(snap, i, c)) / h;
            grad_part += diff * diff * (hi - lo);
        }

        // competition part and |f| on nodes
        std::vector<double> prod(traj.nodes()), fair(traj.nodes());
        for (int j = 0; j < traj.nodes(); ++j) {
            const Point p{traj.x_node(j), 0.0};
            const double wi = traj.state(snap, i, j);
            double comp = 0.0;
            for (int q = 0; q < spec.k; ++q)
                if (q != i) {
                    const double wq = traj.state(snap, q, j);
                    comp += spec.eval_a(i, q, t, p) * wq * wq;
                }
            prod[j] = spec.eval_beta(t, p) * wi * wi * comp;
            fair[j] = std::fabs(spec.eval_f(i, t, p, wi));
        }
        integrand[snap] = di * grad_part + detail::integrate_pl(cell_x, prod, in_lo, in_hi);
        f_abs[snap] = detail::integrate_pl(cell_x, fair, traj.x_lo, traj.x_hi);
    }

    LemmaSqResult out;
    out.value = detail::integrate_pl(traj.times, integrand, T, T + tau);

    // int_T^{T+tau} d_i(t) dt on a dense lattice, independent of the stride
    const int panels = 512;
    double d_int = 0.0;
    for (int q = 0; q < panels; ++q) {
        const double t0 = T + tau * q / panels;
        const double t1 = T + tau * (q + 1) / panels;
        d_int += 0.5 * (spec.eval_d(i, t0) + spec.eval_d(i, t1)) * (t1 - t0);
    }
    const double f_int = detail::integrate_pl(traj.times, f_abs, T, T + tau);
    const double c_delta =
        2.0 * spec.growth.R2 * spec.domain.measure() + 4.0 * (4.0 / delta) + 2.0;
    out.bound = c_delta * (1.0 + d_int + f_int);
    return out;
}

struct HolderResult {
    double sup_quotient = 0.0;
    double C_hat = 0.0;
};

/// Discrete time-derivative energy C_hat = int ||d_t w||^2 dt (forward
/// differences between recorded states) and the worst Holder-1/2 quotient
/// ||w(t2)-w(t1)|| / sqrt(t2-t1) over recorded node pairs. The discrete
/// Jensen chain gives sup_quotient <= sqrt(C_hat) exactly.
inline HolderResult holder_quotient(const Trajectory& traj) {
    if (traj.times.size() < 3)
        throw std::invalid_argument("holder_quotient: need at least three recorded states");
    const double h = traj.h();
    const int ns = traj.nodes();

    auto l2_sq_diff = [&](std::size_t s1, std::size_t s2) {
        double acc = 0.0;
        for (int i = 0; i < traj.k; ++i)
            for (int j = 0; j < ns; ++j) {
                const double tw = (j == 0 || j == traj.n_cells) ? 0.5 * h : h;
                const double diff = traj.state(s2, i, j) - traj.state(s1, i, j);
                acc += tw * diff * diff;
            }
        return acc;
    };

    HolderResult res;
    for (std::size_t s = 1; s < traj.times.size(); ++s) {
        const double gap = traj.times[s] - traj.times[s - 1];
        res.C_hat += l2_sq_diff(s - 1, s) / gap;
    }
    for (std::size_t s1 = 0; s1 < traj.times.size(); ++s1)
        for (std::size_t s2 = s1 + 1; s2 < traj.times.size(); ++s2) {
            const double q =
                std::sqrt(l2_sq_diff(s1, s2) / (traj.times[s2] - traj.times[s1]));
            res.sup_quotient = std::max(res.sup_quotient, q);
        }
    return res;
}

/// S(t) = int sum_{i<j} (a_ij + a_ji) w_i^2 w_j^2 dx and its beta-weighted
/// variant, trapezoid in space on the trajectory nodes.
struct SegregationTrace {
    std::vector<double> times;
    std::vector<double> S;
    std::vector<double> S_beta;
};

inline SegregationTrace segregation_trace(const Trajectory& traj, const ProblemSpec& spec) {
    SegregationTrace out;
    out.times = traj.times;
    out.S.resize(traj.times.size());
    out.S_beta.resize(traj.times.size());
    const double h = traj.h();
    for (std::size_t snap = 0; snap < traj.times.size(); ++snap) {
        const double t = traj.times[snap];
        double s_acc = 0.0, sb_acc = 0.0;
        for (int j = 0; j < traj.nodes(); ++j) {
            const Point p{traj.x_node(j), 0.0};
            const double tw = (j == 0 || j == traj.n_cells) ? 0.5 * h : h;
            double cross = 0.0;
            for (int i = 0; i < spec.k; ++i)
                for (int q = i + 1; q < spec.k; ++q) {
                    const double wi = traj.state(snap, i, j);
                    const double wq = traj.state(snap, q, j);
                    cross += (spec.eval_a(i, q, t, p) + spec.eval_a(q, i, t, p)) * wi * wi * wq * wq;
                }
            s_acc += tw * cross;
            sb_acc += tw * spec.eval_beta(t, p) * cross;
        }
        out.S[snap] = s_acc;
        out.S_beta[snap] = sb_acc;
    }
    return out;
}

/// Windowed averages of the segregation trace together with the decay bound
/// 4 C_{delta,1} / inf_{[T,T+1]} b(t); reported only for problems that
/// declare the envelope b and the interaction floor mu_bar.
struct SegregationWindow {
    double T = 0.0;
    double tau = 1.0;
    double avg_S = 0.0;
    double avg_S_beta = 0.0;
    double bound = 0.0;  // 4 C_{delta,1} / inf b
};

inline std::vector<SegregationWindow> windowed_segregation(const Trajectory& traj,
                                                           const ProblemSpec& spec, double delta,
                                                           double tau,
                                                           const std::vector<double>& window_starts) {
    if (!spec.b_lower || !spec.mu_bar)
        throw std::invalid_argument("windowed_segregation: requires b_lower and mu_bar");
    const SegregationTrace trace = segregation_trace(traj, spec);
    const double c_delta_1 = lemma_sq_uniform_bound(spec, delta, 1.0);

    std::vector<SegregationWindow> out;
    for (double T : window_starts) {
        if (T < traj.times.front() - 1e-12 || T + tau > traj.times.back() + 1e-12) continue;
        SegregationWindow w;
        w.T = T;
        w.tau = tau;
        w.avg_S = detail::integrate_pl(trace.times, trace.S, T, T + tau) / tau;
        w.avg_S_beta = detail::integrate_pl(trace.times, trace.S_beta, T, T + tau) / tau;
        double inf_b = std::numeric_limits<double>::infinity();
        const int samples = 257;
        for (int q = 0; q < samples; ++q) {
            const double t = T + 1.0 * q / (samples - 1);
            inf_b = std::min(inf_b, (*spec.b_lower)(t, 0.0, 0.0));
        }
        w.bound = inf_b > 0.0 ? 4.0 * c_delta_1 / inf_b : std::numeric_limits<double>::infinity();
        out.push_back(w);
    }
    return out;
}

}  // namespace gpwide
