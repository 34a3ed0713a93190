#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gpwide {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Rectangular spatial domain; dims is 1 or 2 (interval or rectangle).
struct Domain {
    int dims = 1;
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;

    double measure() const {
        return dims == 1 ? (x_hi - x_lo) : (x_hi - x_lo) * (y_hi - y_lo);
    }

    static Domain interval(double lo, double hi) {
        if (!(hi > lo)) throw std::invalid_argument("domain requires x_hi > x_lo");
        return Domain{1, lo, hi, 0.0, 1.0};
    }
    static Domain rectangle(double xlo, double xhi, double ylo, double yhi) {
        if (!(xhi > xlo) || !(yhi > ylo))
            throw std::invalid_argument("domain requires positive extents");
        return Domain{2, xlo, xhi, ylo, yhi};
    }
};

/// Uniform space-time lattice on domain x [0, T_max]. Spatial nodes are
/// numbered x-fastest; trapezoid weights halve at domain faces.
class Grid {
public:
    Grid() = default;

    static Grid make(const Domain& dom, int nx, int ny, double t_max, int m) {
        if (nx < 2 || m < 2) throw std::invalid_argument("grid requires N >= 2 and M >= 2");
        if (dom.dims == 2 && ny < 2) throw std::invalid_argument("grid requires Ny >= 2");
        if (!(t_max > 0.0)) throw std::invalid_argument("grid requires T_max > 0");
        Grid g;
        g.dom_ = dom;
        g.nx_ = nx;
        g.ny_ = dom.dims == 2 ? ny : 0;
        g.m_ = m;
        g.t_max_ = t_max;
        return g;
    }

    static Grid make_1d(double x_lo, double x_hi, int n, double t_max, int m) {
        return make(Domain::interval(x_lo, x_hi), n, 0, t_max, m);
    }

    const Domain& domain() const { return dom_; }
    int dims() const { return dom_.dims; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int m() const { return m_; }
    double t_max() const { return t_max_; }
    double dt() const { return t_max_ / m_; }
    double hx() const { return (dom_.x_hi - dom_.x_lo) / nx_; }
    double hy() const { return dom_.dims == 2 ? (dom_.y_hi - dom_.y_lo) / ny_ : 0.0; }

    /// Number of spatial nodes.
    int num_nodes() const { return dom_.dims == 1 ? nx_ + 1 : (nx_ + 1) * (ny_ + 1); }
    int num_time_nodes() const { return m_ + 1; }

    double time_node(int n) const { return t_max_ * n / m_; }

    Point node_point(int j) const {
        if (dom_.dims == 1) return Point{dom_.x_lo + hx() * j, 0.0};
        const int jx = j % (nx_ + 1);
        const int jy = j / (nx_ + 1);
        return Point{dom_.x_lo + hx() * jx, dom_.y_lo + hy() * jy};
    }

    /// Trapezoid quadrature weight of spatial node j.
    double trap_weight(int j) const {
        if (dom_.dims == 1) {
            const double w = (j == 0 || j == nx_) ? 0.5 : 1.0;
            return w * hx();
        }
        const int jx = j % (nx_ + 1);
        const int jy = j / (nx_ + 1);
        const double wx = ((jx == 0 || jx == nx_) ? 0.5 : 1.0) * hx();
        const double wy = ((jy == 0 || jy == ny_) ? 0.5 : 1.0) * hy();
        return wx * wy;
    }

    bool is_boundary_node(int j) const {
        if (dom_.dims == 1) return j == 0 || j == nx_;
        const int jx = j % (nx_ + 1);
        const int jy = j / (nx_ + 1);
        return jx == 0 || jx == nx_ || jy == 0 || jy == ny_;
    }

    bool is_interior_node(int j) const { return !is_boundary_node(j); }

private:
    Domain dom_;
    int nx_ = 0, ny_ = 0, m_ = 0;
    double t_max_ = 0.0;
};

/// Node values w_i(t_n, x_j) for all species; the unknown of both solvers.
/// Layout: species-major, then time, then space.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(int k, int num_time_nodes, int num_space_nodes)
        : k_(k), nt_(num_time_nodes), ns_(num_space_nodes),
          values_(static_cast<std::size_t>(k) * num_time_nodes * num_space_nodes, 0.0) {}

    int species() const { return k_; }
    int time_nodes() const { return nt_; }
    int space_nodes() const { return ns_; }

    double& at(int i, int n, int j) { return values_[index(i, n, j)]; }
    double at(int i, int n, int j) const { return values_[index(i, n, j)]; }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }
    std::size_t size() const { return values_.size(); }

    bool same_shape(const SpaceTimeField& o) const {
        return k_ == o.k_ && nt_ == o.nt_ && ns_ == o.ns_;
    }

private:
    std::size_t index(int i, int n, int j) const {
        return (static_cast<std::size_t>(i) * nt_ + n) * ns_ + j;
    }

    int k_ = 0, nt_ = 0, ns_ = 0;
    std::vector<double> values_;
};

/// Horizon T beyond which the weighted tail
///   int_T^inf (e^{-t/eps}/eps) e^{c t} dt = e^{-(1-eps c)T/eps} / (1-eps c)
/// drops below tol. Requires 1 - eps*c >= 1/2, which the admissibility
/// threshold guarantees for every coefficient growth rate in play.
inline double truncation_horizon(double eps, double c, double tol) {
    if (!(eps > 0.0)) throw std::invalid_argument("truncation_horizon: eps must be positive");
    if (c < 0.0) throw std::invalid_argument("truncation_horizon: growth rate must be >= 0");
    if (!(tol > 0.0) || tol > 1.0)
        throw std::invalid_argument("truncation_horizon: tol must lie in (0, 1]");
    const double gap = 1.0 - eps * c;
    if (gap < 0.5) throw std::invalid_argument("truncation_horizon: requires 1 - eps*c >= 1/2");
    const double T = eps * std::log(1.0 / (gap * tol)) / gap;
    return T > 0.0 ? T : 0.0;
}

/// Forward-difference squared spatial gradient of species i at time node n,
/// one value per spatial cell (1D grids).
inline std::vector<double> discrete_gradient_sq(const SpaceTimeField& v, const Grid& grid,
                                                int i, int n) {
    if (grid.dims() != 1)
        throw std::invalid_argument("discrete_gradient_sq: cell form is 1D only");
    const double h = grid.hx();
    std::vector<double> cells(grid.nx());
    for (int c = 0; c < grid.nx(); ++c) {
        const double d = (v.at(i, n, c + 1) - v.at(i, n, c)) / h;
        cells[c] = d * d;
    }
    return cells;
}

/// Forward-difference squared time derivative of species i at spatial node j,
/// one value per time interval.
inline std::vector<double> discrete_time_derivative_sq(const SpaceTimeField& v, const Grid& grid,
                                                       int i, int j) {
    const double dt = grid.dt();
    std::vector<double> intervals(grid.m());
    for (int n = 0; n < grid.m(); ++n) {
        const double d = (v.at(i, n + 1, j) - v.at(i, n, j)) / dt;
        intervals[n] = d * d;
    }
    return intervals;
}

/// Quadrature of integrand(t, x) against the weight e^{-t/eps}/eps over
/// domain x [0, T_max]: trapezoid in space, integrand sampled at the left
/// time endpoint, weight mass integrated exactly per time interval.
/// `values` holds integrand samples at (time node n = 0..M-1, space node j).
inline double weighted_spacetime_quadrature(const std::vector<double>& values, const Grid& grid,
                                            double eps) {
    const int m = grid.m();
    const int ns = grid.num_nodes();
    if (values.size() != static_cast<std::size_t>(m) * ns)
        throw std::invalid_argument("weighted_spacetime_quadrature: shape mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("weighted_spacetime_quadrature: eps > 0 required");
    double total = 0.0;
    for (int n = 0; n < m; ++n) {
        const double w =
            std::exp(-grid.time_node(n) / eps) - std::exp(-grid.time_node(n + 1) / eps);
        double slice = 0.0;
        for (int j = 0; j < ns; ++j) slice += grid.trap_weight(j) * values[static_cast<std::size_t>(n) * ns + j];
        total += w * slice;
    }
    return total;
}

/// Linear interpolation of a space-time field onto another grid (clamped at
/// the source boundary). Used for warm starts and solver comparisons.
inline SpaceTimeField interpolate_field(const SpaceTimeField& src, const Grid& src_grid,
                                        const Grid& dst_grid) {
    if (src_grid.dims() != dst_grid.dims())
        throw std::invalid_argument("interpolate_field: dimension mismatch");
    const int k = src.species();
    SpaceTimeField out(k, dst_grid.num_time_nodes(), dst_grid.num_nodes());

    auto clamp01 = [](double u, double lo, double hi) { return u < lo ? lo : (u > hi ? hi : u); };

    for (int i = 0; i < k; ++i) {
        for (int n = 0; n < dst_grid.num_time_nodes(); ++n) {
            const double t = clamp01(dst_grid.time_node(n), 0.0, src_grid.t_max());
            const double pt = t / src_grid.dt();
            const int n0 = std::min(static_cast<int>(pt), src_grid.m() - 1);
            const double ft = pt - n0;
            for (int j = 0; j < dst_grid.num_nodes(); ++j) {
                const Point p = dst_grid.node_point(j);
                double val;
                if (src_grid.dims() == 1) {
                    const double px =
                        clamp01((p.x - src_grid.domain().x_lo) / src_grid.hx(), 0.0,
                                static_cast<double>(src_grid.nx()));
                    const int j0 = std::min(static_cast<int>(px), src_grid.nx() - 1);
                    const double fx = px - j0;
                    const double a = (1 - fx) * src.at(i, n0, j0) + fx * src.at(i, n0, j0 + 1);
                    const double b =
                        (1 - fx) * src.at(i, n0 + 1, j0) + fx * src.at(i, n0 + 1, j0 + 1);
                    val = (1 - ft) * a + ft * b;
                } else {
                    const double px =
                        clamp01((p.x - src_grid.domain().x_lo) / src_grid.hx(), 0.0,
                                static_cast<double>(src_grid.nx()));
                    const double py =
                        clamp01((p.y - src_grid.domain().y_lo) / src_grid.hy(), 0.0,
                                static_cast<double>(src_grid.ny()));
                    const int jx0 = std::min(static_cast<int>(px), src_grid.nx() - 1);
                    const int jy0 = std::min(static_cast<int>(py), src_grid.ny() - 1);
                    const double fx = px - jx0;
                    const double fy = py - jy0;
                    auto node = [&](int jx, int jy) { return jy * (src_grid.nx() + 1) + jx; };
                    auto bilin = [&](int nn) {
                        const double a = (1 - fx) * src.at(i, nn, node(jx0, jy0)) +
                                         fx * src.at(i, nn, node(jx0 + 1, jy0));
                        const double b = (1 - fx) * src.at(i, nn, node(jx0, jy0 + 1)) +
                                         fx * src.at(i, nn, node(jx0 + 1, jy0 + 1));
                        return (1 - fy) * a + fy * b;
                    };
                    val = (1 - ft) * bilin(n0) + ft * bilin(n0 + 1);
                }
                out.at(i, n, j) = val;
            }
        }
    }
    return out;
}

}  // namespace gpwide
