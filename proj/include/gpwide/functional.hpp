#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gpwide/grid.hpp"
#include "gpwide/problem.hpp"
#include "gpwide/threading.hpp"

namespace gpwide {

/// Raised when an iterate or functional value becomes non-finite.
class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-time-node energy traces of a space-time field: the inertia term I,
/// the remaining integrand R, the weighted tail energy E and the
/// coefficient-time-derivative correction Q, together with the discrete
/// residual of the identity E' = (1/eps)(-I - R + E).
struct EnergyReport {
    double F_eps = 0.0;
    std::vector<double> I;
    std::vector<double> R;
    std::vector<double> E;
    std::vector<double> Q;
    std::vector<double> ode_residual;
};

namespace detail {

/// 24-point Gauss-Legendre rule on [0, 1]; nodes found by Newton iteration on
/// the Legendre polynomial. Used for the reaction antiderivative inside the
/// functional, where the integrand is smooth on [0, 1].
struct GaussLegendre {
    std::array<double, 24> node;
    std::array<double, 24> weight;

    GaussLegendre() {
        constexpr int n = 24;
        for (int i = 0; i < n; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::fabs(dz) < 1e-15) break;
            }
            node[i] = 0.5 * (1.0 - z);
            weight[i] = 1.0 / ((1.0 - z * z) * pp * pp);
        }
    }
};

inline const GaussLegendre& gauss_legendre() {
    static const GaussLegendre rule;
    return rule;
}

}  // namespace detail

/// Discrete weighted functional on a fixed (spec, grid, eps) triple, with all
/// coefficient tables sampled once. Forward differences in both axes make the
/// analytic gradient the exact adjoint of the assembly.
class WideFunctional {
public:
    WideFunctional(const ProblemSpec& spec, const Grid& grid, double eps)
        : spec_(&spec), grid_(&grid), eps_(eps) {
        spec.check_shape();
        const double eb = epsilon_bar(spec.growth);
        if (!(eps > 0.0) || eps >= eb)
            throw std::invalid_argument("eps must lie in (0, epsilon_bar) with epsilon_bar = " +
                                        std::to_string(eb));
        build_tables();
    }

    const ProblemSpec& spec() const { return *spec_; }
    const Grid& grid() const { return *grid_; }
    double eps() const { return eps_; }
    const std::vector<std::vector<double>>& v0_samples() const { return v0_; }

    /// Reaction antiderivative used inside the functional: exact clamp-split
    /// plus Gauss-Legendre on the smooth part, so its s-derivative is f to
    /// machine precision for smooth f.
    double antiderivative(int i, double t, const Point& p, double s) const {
        if (f_zero_[i]) return 0.0;
        if (s <= 0.0) return spec_->eval_f(i, t, p, 0.0) * s;
        const auto& gl = detail::gauss_legendre();
        const double s_in = std::min(s, 1.0);
        double acc = 0.0;
        for (int q = 0; q < 24; ++q)
            acc += gl.weight[q] * spec_->eval_f(i, t, p, s_in * gl.node[q]);
        acc *= s_in;
        if (s > 1.0) acc += spec_->eval_f(i, t, p, 1.0) * (s - 1.0);
        return acc;
    }

    /// Functional value. The field must satisfy the admissible-set pins
    /// exactly (initial slice, and lateral trace under dirichlet_trace).
    /// Per-interval integrands are data-parallel; the weighted sum runs in
    /// fixed order so the result does not depend on the thread width.
    double value(const SpaceTimeField& v) const {
        check_admissible_pins(v);
        const int m = grid_->m();
        std::vector<double> partial(m);
        detail::parallel_chunks(m, parallel_width(), [&](unsigned, int begin, int end) {
            for (int n = begin; n < end; ++n) partial[n] = slice_integrand(v, n);
        });
        double total = 0.0;
        for (int n = 0; n < m; ++n) total += W_[n] * partial[n];
        if (!std::isfinite(total)) throw NumericsError("functional value is non-finite");
        return total;
    }

    SpaceTimeField gradient(const SpaceTimeField& v) const {
        SpaceTimeField g(v.species(), v.time_nodes(), v.space_nodes());
        gradient(v, g);
        return g;
    }

    /// Exact gradient of the discrete functional, all nodes reported
    /// (constrained entries are masked by the minimizer, not here).
    void gradient(const SpaceTimeField& v, SpaceTimeField& g) const {
        check_shape(v);
        if (!v.same_shape(g)) g = SpaceTimeField(v.species(), v.time_nodes(), v.space_nodes());
        std::fill(g.data().begin(), g.data().end(), 0.0);
        const int m = grid_->m();
        const unsigned width = parallel_width();
        if (width <= 1) {
            for (int n = 0; n < m; ++n) add_interval_gradient(v, n, g);
            return;
        }
        // per-chunk buffers reduced in chunk order: byte-stable for a fixed width
        const unsigned chunks = std::min<unsigned>(width, static_cast<unsigned>(m));
        std::vector<SpaceTimeField> buffers(
            chunks, SpaceTimeField(v.species(), v.time_nodes(), v.space_nodes()));
        detail::parallel_chunks(m, width, [&](unsigned c, int begin, int end) {
            for (int n = begin; n < end; ++n) add_interval_gradient(v, n, buffers[c]);
        });
        for (const SpaceTimeField& buf : buffers)
            for (std::size_t e = 0; e < g.size(); ++e) g.data()[e] += buf.data()[e];
    }

    /// Diagonal curvature estimate of the discrete functional (quadratic terms
    /// exact, interaction term local part), floored away from zero. Used by
    /// the minimizer to scale descent directions.
    void curvature_diagonal(const SpaceTimeField& v, SpaceTimeField& D) const {
        check_shape(v);
        if (!v.same_shape(D)) D = SpaceTimeField(v.species(), v.time_nodes(), v.space_nodes());
        std::fill(D.data().begin(), D.data().end(), 0.0);
        const int k = spec_->k, m = grid_->m(), ns = grid_->num_nodes();
        const double dt = grid_->dt();
        for (int n = 0; n < m; ++n) {
            const double w = W_[n];
            for (int i = 0; i < k; ++i) {
                const double ckin = 2.0 * eps_ * w / (dt * dt);
                for (int j = 0; j < ns; ++j) {
                    const double e = ckin * r_[i][j] * tw_[j];
                    D.at(i, n + 1, j) += e;
                    D.at(i, n, j) += e;
                }
                const double dcoef = 2.0 * w * d_[i][n];
                for (const Edge& e : edges_) {
                    D.at(i, n, e.b) += dcoef * e.stiffness;
                    D.at(i, n, e.a) += dcoef * e.stiffness;
                }
            }
            for (const Pair& pq : pairs_) {
                const double* atab = pq.values.data() + static_cast<std::size_t>(n) * ns;
                for (int j = 0; j < ns; ++j) {
                    const double b2 = 2.0 * w * tw_[j] * beta_[idx(n, j)] * atab[j];
                    const double vp = v.at(pq.p, n, j);
                    const double vq = v.at(pq.q, n, j);
                    D.at(pq.p, n, j) += b2 * vq * vq;
                    D.at(pq.q, n, j) += b2 * vp * vp;
                }
            }
        }
        double dmax = 0.0;
        for (double x : D.data()) dmax = std::max(dmax, x);
        const double floor = std::max(dmax * 1e-14, 1e-300);
        for (double& x : D.data()) x = std::max(x, floor);
    }

    /// Energy traces I, R, E, Q on the time nodes; E is accumulated backward
    /// from its tail-integral definition so that E[0] reproduces the
    /// functional value, and the energy identity becomes a checkable residual.
    EnergyReport energy_traces(const SpaceTimeField& v) const {
        check_admissible_pins(v);
        const int m = grid_->m();
        const double dt = grid_->dt();
        EnergyReport rep;
        rep.I.assign(m + 1, 0.0);
        rep.R.assign(m + 1, 0.0);
        rep.E.assign(m + 1, 0.0);
        rep.Q.assign(m + 1, 0.0);
        rep.ode_residual.assign(m + 1, 0.0);

        for (int n = 0; n < m; ++n) rep.I[n] = inertia_trace(v, n, n + 1);
        rep.I[m] = inertia_trace(v, m - 1, m);  // backward difference at the last node
        for (int n = 0; n <= m; ++n) rep.R[n] = remaining_trace(v, n);

        std::vector<double> Qint(m + 1, 0.0);
        for (int n = 0; n <= m; ++n) Qint[n] = q_integrand_trace(v, n);

        const double decay = std::exp(-dt / eps_);
        for (int n = m - 1; n >= 0; --n) {
            rep.E[n] = (1.0 - decay) * (rep.I[n] + rep.R[n]) + decay * rep.E[n + 1];
            rep.Q[n] = (1.0 - decay) * Qint[n] + decay * rep.Q[n + 1];
        }

        for (int n = 0; n < m; ++n)
            rep.ode_residual[n] = (rep.E[n + 1] - rep.E[n]) / dt -
                                  (-rep.I[n] - rep.R[n] + rep.E[n]) / eps_;
        rep.ode_residual[m] = (rep.E[m] - rep.E[m - 1]) / dt -
                              (-rep.I[m] - rep.R[m] + rep.E[m]) / eps_;

        rep.F_eps = value(v);
        return rep;
    }

    double weight(int n) const { return W_[n]; }

private:
    struct Edge {
        int a, b;
        double stiffness;  // cross-axis measure / h^2
    };
    struct Pair {
        int p, q;
        std::vector<double> values;    // a_pq on (time node, space node)
        std::vector<double> t_deriv;   // finite-difference time derivative
    };

    std::size_t idx(int n, int j) const {
        return static_cast<std::size_t>(n) * grid_->num_nodes() + j;
    }

    unsigned parallel_width() const {
        const std::size_t work = static_cast<std::size_t>(spec_->k) * grid_->m() * grid_->num_nodes();
        return work >= 32768 ? thread_cap() : 1;
    }

    /// Adds interval n's gradient contributions (rows n and n+1) into g.
    void add_interval_gradient(const SpaceTimeField& v, int n, SpaceTimeField& g) const {
        const int k = spec_->k, ns = grid_->num_nodes();
        const double dt = grid_->dt();
        const double w = W_[n];
        for (int i = 0; i < k; ++i) {
            // kinetic term: 2 eps W r tw (v[n+1]-v[n])/dt^2 with +/- signs
            const double ckin = 2.0 * eps_ * w / (dt * dt);
            for (int j = 0; j < ns; ++j) {
                const double e = ckin * r_[i][j] * tw_[j] * (v.at(i, n + 1, j) - v.at(i, n, j));
                g.at(i, n + 1, j) += e;
                g.at(i, n, j) -= e;
            }
            // diffusion term via forward-difference edges
            const double dcoef = 2.0 * w * d_[i][n];
            for (const Edge& e : edges_) {
                const double diff = v.at(i, n, e.b) - v.at(i, n, e.a);
                const double contrib = dcoef * e.stiffness * diff;
                g.at(i, n, e.b) += contrib;
                g.at(i, n, e.a) -= contrib;
            }
            // reaction term: -2 f_i(t_n, x, v_i)
            if (!f_zero_[i]) {
                const double tn = grid_->time_node(n);
                for (int j = 0; j < ns; ++j)
                    g.at(i, n, j) -=
                        2.0 * w * tw_[j] * spec_->eval_f(i, tn, grid_->node_point(j), v.at(i, n, j));
            }
        }
        // interaction term: 2 beta v_i sum_{j != i} a_ij v_j^2
        for (const Pair& pq : pairs_) {
            const double* atab = pq.values.data() + static_cast<std::size_t>(n) * ns;
            for (int j = 0; j < ns; ++j) {
                const double b2 = 2.0 * w * tw_[j] * beta_[idx(n, j)] * atab[j];
                const double vp = v.at(pq.p, n, j);
                const double vq = v.at(pq.q, n, j);
                g.at(pq.p, n, j) += b2 * vp * vq * vq;
                g.at(pq.q, n, j) += b2 * vq * vp * vp;
            }
        }
    }

    void build_tables() {
        const int k = spec_->k, m = grid_->m(), ns = grid_->num_nodes();
        W_.resize(m);
        for (int n = 0; n < m; ++n)
            W_[n] = std::exp(-grid_->time_node(n) / eps_) - std::exp(-grid_->time_node(n + 1) / eps_);

        tw_.resize(ns);
        for (int j = 0; j < ns; ++j) tw_[j] = grid_->trap_weight(j);

        d_.assign(k, std::vector<double>(m + 1));
        dprime_.assign(k, std::vector<double>(m + 1));
        for (int i = 0; i < k; ++i)
            for (int n = 0; n <= m; ++n) {
                const double tn = grid_->time_node(n);
                d_[i][n] = spec_->eval_d(i, tn);
                dprime_[i][n] = detail::time_derivative_fd(
                    [&](double tt) { return spec_->eval_d(i, tt); }, tn);
            }

        r_.assign(k, std::vector<double>(ns));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < ns; ++j) r_[i][j] = spec_->eval_r(i, grid_->node_point(j));

        beta_.resize(static_cast<std::size_t>(m + 1) * ns);
        beta_t_.resize(beta_.size());
        for (int n = 0; n <= m; ++n) {
            const double tn = grid_->time_node(n);
            for (int j = 0; j < ns; ++j) {
                const Point p = grid_->node_point(j);
                beta_[idx(n, j)] = spec_->eval_beta(tn, p);
                beta_t_[idx(n, j)] = detail::time_derivative_fd(
                    [&](double tt) { return spec_->eval_beta(tt, p); }, tn);
            }
        }

        for (int p = 0; p < k; ++p)
            for (int q = p + 1; q < k; ++q) {
                Pair pr;
                pr.p = p;
                pr.q = q;
                pr.values.resize(static_cast<std::size_t>(m + 1) * ns);
                pr.t_deriv.resize(pr.values.size());
                bool all_zero = true;
                for (int n = 0; n <= m; ++n) {
                    const double tn = grid_->time_node(n);
                    for (int j = 0; j < ns; ++j) {
                        const Point pt = grid_->node_point(j);
                        const double val = spec_->eval_a(p, q, tn, pt);
                        pr.values[idx(n, j)] = val;
                        pr.t_deriv[idx(n, j)] = detail::time_derivative_fd(
                            [&](double tt) { return spec_->eval_a(p, q, tt, pt); }, tn);
                        all_zero = all_zero && val == 0.0;
                    }
                }
                if (!all_zero) pairs_.push_back(std::move(pr));
            }

        f_zero_.resize(k);
        for (int i = 0; i < k; ++i) f_zero_[i] = spec_->f_is_zero(i);

        // forward-difference edges with the cross-axis trapezoid measure
        if (grid_->dims() == 1) {
            const double hx = grid_->hx();
            for (int c = 0; c < grid_->nx(); ++c)
                edges_.push_back(Edge{c, c + 1, hx / (hx * hx)});
        } else {
            const int nx = grid_->nx(), ny = grid_->ny();
            const double hx = grid_->hx(), hy = grid_->hy();
            for (int jy = 0; jy <= ny; ++jy) {
                const double wy = ((jy == 0 || jy == ny) ? 0.5 : 1.0) * hy;
                for (int jx = 0; jx < nx; ++jx) {
                    const int a = jy * (nx + 1) + jx;
                    edges_.push_back(Edge{a, a + 1, wy * hx / (hx * hx)});
                }
            }
            for (int jx = 0; jx <= nx; ++jx) {
                const double wx = ((jx == 0 || jx == nx) ? 0.5 : 1.0) * hx;
                for (int jy = 0; jy < ny; ++jy) {
                    const int a = jy * (nx + 1) + jx;
                    edges_.push_back(Edge{a, a + (nx + 1), wx * hy / (hy * hy)});
                }
            }
        }

        v0_ = spec_->sample_v0(*grid_);
    }

    void check_shape(const SpaceTimeField& v) const {
        if (v.species() != spec_->k || v.time_nodes() != grid_->num_time_nodes() ||
            v.space_nodes() != grid_->num_nodes())
            throw std::invalid_argument("field shape does not match grid/spec");
    }

    void check_admissible_pins(const SpaceTimeField& v) const {
        check_shape(v);
        const int ns = grid_->num_nodes();
        for (int i = 0; i < spec_->k; ++i)
            for (int j = 0; j < ns; ++j)
                if (v.at(i, 0, j) != v0_[i][j])
                    throw std::invalid_argument("initial slice differs from v0");
        if (spec_->boundary_mode == BoundaryMode::DirichletTrace) {
            for (int i = 0; i < spec_->k; ++i)
                for (int n = 0; n < v.time_nodes(); ++n)
                    for (int j = 0; j < ns; ++j)
                        if (grid_->is_boundary_node(j) && v.at(i, n, j) != v0_[i][j])
                            throw std::invalid_argument("boundary trace differs from g");
        }
    }

    /// Spatial integral of the four-term integrand at the left endpoint of
    /// time interval n (kinetic term from the forward difference on [t_n, t_{n+1}]).
    double slice_integrand(const SpaceTimeField& v, int n) const {
        return eps_ * inertia_over_eps(v, n, n + 1) + remaining_trace(v, n);
    }

    double inertia_over_eps(const SpaceTimeField& v, int n0, int n1) const {
        const double dt = grid_->dt();
        const int ns = grid_->num_nodes();
        double acc = 0.0;
        for (int i = 0; i < spec_->k; ++i)
            for (int j = 0; j < ns; ++j) {
                const double dv = (v.at(i, n1, j) - v.at(i, n0, j)) / dt;
                acc += tw_[j] * r_[i][j] * dv * dv;
            }
        return acc;
    }

    /// I(t) = eps * int r |dv/dt|^2 with the forward difference on [n0, n1].
    double inertia_trace(const SpaceTimeField& v, int n0, int n1) const {
        return eps_ * inertia_over_eps(v, n0, n1);
    }

    /// R(t_n) = int d |grad v|^2 - 2 F(t, x, v) + (beta/2) <v^2, A v^2>.
    double remaining_trace(const SpaceTimeField& v, int n) const {
        const int ns = grid_->num_nodes();
        const double tn = grid_->time_node(n);
        double acc = 0.0;
        for (int i = 0; i < spec_->k; ++i) {
            double grad = 0.0;
            for (const Edge& e : edges_) {
                const double diff = v.at(i, n, e.b) - v.at(i, n, e.a);
                grad += e.stiffness * diff * diff;
            }
            acc += d_[i][n] * grad;
            if (!f_zero_[i])
                for (int j = 0; j < ns; ++j)
                    acc -= 2.0 * tw_[j] * antiderivative(i, tn, grid_->node_point(j), v.at(i, n, j));
        }
        for (const Pair& pq : pairs_) {
            const double* atab = pq.values.data() + static_cast<std::size_t>(n) * grid_->num_nodes();
            for (int j = 0; j < ns; ++j) {
                const double vp = v.at(pq.p, n, j);
                const double vq = v.at(pq.q, n, j);
                acc += tw_[j] * beta_[idx(n, j)] * atab[j] * vp * vp * vq * vq;
            }
        }
        return acc;
    }

    /// Integrand of Q at time node n: d'|grad v|^2 - 2 dF/dt + (db/dt / 2)<v^2,Av^2>
    /// + (beta/2) sum da_ij/dt v_i^2 v_j^2, coefficient time derivatives by
    /// centered finite differences with step 1e-5.
    double q_integrand_trace(const SpaceTimeField& v, int n) const {
        const int ns = grid_->num_nodes();
        const double tn = grid_->time_node(n);
        double acc = 0.0;
        for (int i = 0; i < spec_->k; ++i) {
            double grad = 0.0;
            for (const Edge& e : edges_) {
                const double diff = v.at(i, n, e.b) - v.at(i, n, e.a);
                grad += e.stiffness * diff * diff;
            }
            acc += dprime_[i][n] * grad;
            if (!f_zero_[i])
                for (int j = 0; j < ns; ++j) {
                    const Point p = grid_->node_point(j);
                    const double s = v.at(i, n, j);
                    const double dF = detail::time_derivative_fd(
                        [&](double tt) { return antiderivative(i, tt, p, s); }, tn);
                    acc -= 2.0 * tw_[j] * dF;
                }
        }
        for (const Pair& pq : pairs_) {
            const std::size_t base = static_cast<std::size_t>(n) * grid_->num_nodes();
            for (int j = 0; j < ns; ++j) {
                const double vp = v.at(pq.p, n, j);
                const double vq = v.at(pq.q, n, j);
                const double prod = vp * vp * vq * vq;
                acc += tw_[j] * beta_t_[idx(n, j)] * pq.values[base + j] * prod;
                acc += tw_[j] * beta_[idx(n, j)] * pq.t_deriv[base + j] * prod;
            }
        }
        return acc;
    }

    const ProblemSpec* spec_;
    const Grid* grid_;
    double eps_;

    std::vector<double> W_;
    std::vector<double> tw_;
    std::vector<std::vector<double>> d_, dprime_, r_;
    std::vector<double> beta_, beta_t_;
    std::vector<Pair> pairs_;
    std::vector<Edge> edges_;
    std::vector<char> f_zero_;
    std::vector<std::vector<double>> v0_;
};

inline double evaluate_F_eps(const SpaceTimeField& v, const ProblemSpec& spec, const Grid& grid,
                             double eps) {
    return WideFunctional(spec, grid, eps).value(v);
}

inline SpaceTimeField gradient_F_eps(const SpaceTimeField& v, const ProblemSpec& spec,
                                     const Grid& grid, double eps) {
    return WideFunctional(spec, grid, eps).gradient(v);
}

inline EnergyReport energy_traces(const SpaceTimeField& v, const ProblemSpec& spec,
                                  const Grid& grid, double eps) {
    return WideFunctional(spec, grid, eps).energy_traces(v);
}

/// Strong-form residual of the regularized system on interior nodes,
///   -eps r d_tt v + r d_t v - d(t) Lap v - f(t,x,v) + beta v sum_{j!=i} a_ij v_j^2,
/// using centered second differences; zero on constrained/boundary nodes.
/// Unlike the functional this does not require eps below the admissibility
/// threshold (it is a pointwise identity check).
inline SpaceTimeField el_residual(const SpaceTimeField& v, const ProblemSpec& spec,
                                  const Grid& grid, double eps) {
    spec.check_shape();
    if (v.species() != spec.k || v.time_nodes() != grid.num_time_nodes() ||
        v.space_nodes() != grid.num_nodes())
        throw std::invalid_argument("field shape does not match grid/spec");
    SpaceTimeField res(v.species(), v.time_nodes(), v.space_nodes());
    const double dt = grid.dt();
    const int ns = grid.num_nodes();
    const int nx = grid.nx();
    for (int i = 0; i < spec.k; ++i) {
        for (int n = 1; n < grid.m(); ++n) {
            const double tn = grid.time_node(n);
            const double di = spec.eval_d(i, tn);
            for (int j = 0; j < ns; ++j) {
                if (!grid.is_interior_node(j)) continue;
                const Point p = grid.node_point(j);
                const double ri = spec.eval_r(i, p);
                const double vtt =
                    (v.at(i, n + 1, j) - 2.0 * v.at(i, n, j) + v.at(i, n - 1, j)) / (dt * dt);
                const double vt = (v.at(i, n + 1, j) - v.at(i, n - 1, j)) / (2.0 * dt);
                double lap;
                if (grid.dims() == 1) {
                    const double h = grid.hx();
                    lap = (v.at(i, n, j + 1) - 2.0 * v.at(i, n, j) + v.at(i, n, j - 1)) / (h * h);
                } else {
                    const double hx = grid.hx(), hy = grid.hy();
                    lap = (v.at(i, n, j + 1) - 2.0 * v.at(i, n, j) + v.at(i, n, j - 1)) / (hx * hx) +
                          (v.at(i, n, j + nx + 1) - 2.0 * v.at(i, n, j) + v.at(i, n, j - nx - 1)) /
                              (hy * hy);
                }
                double competition = 0.0;
                for (int q = 0; q < spec.k; ++q)
                    if (q != i) {
                        const double vq = v.at(q, n, j);
                        competition += spec.eval_a(i, q, tn, p) * vq * vq;
                    }
                competition *= spec.eval_beta(tn, p) * v.at(i, n, j);
                res.at(i, n, j) = -eps * ri * vtt + ri * vt - di * lap -
                                  spec.eval_f(i, tn, p, v.at(i, n, j)) + competition;
            }
        }
    }
    return res;
}

}  // namespace gpwide
