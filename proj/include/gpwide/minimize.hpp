#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpwide/functional.hpp"
#include "gpwide/grid.hpp"
#include "gpwide/problem.hpp"

namespace gpwide {

struct MinimizeOptions {
    int max_iters = 20000;
    double grad_tol = 1e-7;        // stopping threshold on the projected-gradient sup-norm
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double init_step = 1.0;

    void validate() const {
        if (max_iters < 1 || !(grad_tol > 0) || !(init_step > 0))
            throw std::invalid_argument("minimize options must be positive");
        if (!(armijo_c > 0) || armijo_c >= 1 || !(backtrack_factor > 0) || backtrack_factor >= 1)
            throw std::invalid_argument("armijo_c and backtrack_factor must lie in (0,1)");
    }
};

struct MinimizeResult {
    SpaceTimeField v;
    double F_value = 0.0;
    int iters = 0;
    double final_pg_norm = 0.0;
    bool converged = false;
    std::vector<double> F_history;
    Grid grid;
    double eps = 0.0;
};

namespace detail {

class AdmissibleProjector {
public:
    AdmissibleProjector(const ProblemSpec& spec, const Grid& grid)
        : spec_(&spec), grid_(&grid), v0_(spec.sample_v0(grid)) {
        if (spec.boundary_mode == BoundaryMode::Free) return;
        for (int j = 0; j < grid.num_nodes(); ++j)
            if (grid.is_boundary_node(j)) boundary_nodes_.push_back(j);
    }

    const std::vector<std::vector<double>>& v0() const { return v0_; }

    void apply(SpaceTimeField& v) const {
        for (double& u : v.data()) u = std::clamp(u, 0.0, 1.0);
        pin(v);
    }

    // pins only: initial slice and, under dirichlet_trace, the lateral columns
    void pin(SpaceTimeField& v) const {
        const int k = v.species();
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < v.space_nodes(); ++j) v.at(i, 0, j) = v0_[i][j];
        for (int i = 0; i < k; ++i)
            for (int n = 0; n < v.time_nodes(); ++n)
                for (int j : boundary_nodes_) v.at(i, n, j) = v0_[i][j];
    }

    void zero_pinned(SpaceTimeField& g) const {
        for (int i = 0; i < g.species(); ++i) {
            for (int j = 0; j < g.space_nodes(); ++j) g.at(i, 0, j) = 0.0;
            for (int n = 0; n < g.time_nodes(); ++n)
                for (int j : boundary_nodes_) g.at(i, n, j) = 0.0;
        }
    }

    SpaceTimeField constant_in_time_v0(int num_time_nodes) const {
        SpaceTimeField v(spec_->k, num_time_nodes, grid_->num_nodes());
        for (int i = 0; i < spec_->k; ++i)
            for (int n = 0; n < num_time_nodes; ++n)
                for (int j = 0; j < grid_->num_nodes(); ++j) v.at(i, n, j) = v0_[i][j];
        return v;
    }

private:
    const ProblemSpec* spec_;
    const Grid* grid_;
    std::vector<std::vector<double>> v0_;
    std::vector<int> boundary_nodes_;
};

}  // namespace detail

/// Clamp to [0,1], overwrite the initial slice with v0 and, under
/// dirichlet_trace, the lateral boundary columns with g. Idempotent.
inline SpaceTimeField project_admissible(const SpaceTimeField& v, const ProblemSpec& spec,
                                         const Grid& grid) {
    detail::AdmissibleProjector proj(spec, grid);
    SpaceTimeField out = v;
    proj.apply(out);
    return out;
}

/// Projected gradient descent with Armijo backtracking on the discrete
/// functional. Descent directions are scaled by the diagonal curvature of the
/// assembly (which carries the exponential weight, taming its conditioning)
/// and the trial step follows a Barzilai-Borwein estimate; each accepted step
/// satisfies the Armijo decrease F(v+) <= F(v) - c <G, v - v+>, which reduces
/// to the step * |masked G|^2 form whenever the projection is inactive.
/// Convergence is declared on the sup-norm of (v - P(v - step G)) / step.
inline MinimizeResult minimize(const ProblemSpec& spec, const Grid& grid, double eps,
                               std::optional<SpaceTimeField> init, const MinimizeOptions& opts) {
    opts.validate();
    WideFunctional fn(spec, grid, eps);
    detail::AdmissibleProjector proj(spec, grid);

    MinimizeResult res;
    res.grid = grid;
    res.eps = eps;
    if (init) {
        res.v = std::move(*init);
        if (res.v.species() != spec.k || res.v.time_nodes() != grid.num_time_nodes() ||
            res.v.space_nodes() != grid.num_nodes())
            throw std::invalid_argument("init field shape does not match grid");
    } else {
        res.v = proj.constant_in_time_v0(grid.num_time_nodes());
    }
    proj.apply(res.v);

    double f;
    try {
        f = fn.value(res.v);
    } catch (const NumericsError& e) {
        throw NumericsError(std::string(e.what()) + " at initial iterate");
    }
    res.F_history.push_back(f);

    SpaceTimeField g(spec.k, grid.num_time_nodes(), grid.num_nodes());
    SpaceTimeField D(spec.k, grid.num_time_nodes(), grid.num_nodes());
    SpaceTimeField dir = g, cand = res.v, v_prev = res.v, dir_prev = g;

    double step = opts.init_step;
    bool have_prev = false;

    for (int it = 0; it < opts.max_iters; ++it) {
        fn.gradient(res.v, g);
        proj.zero_pinned(g);

        // projected-gradient residual at the current step length
        double pg_norm = 0.0;
        for (std::size_t e = 0; e < g.size(); ++e) {
            const double moved = std::clamp(res.v.data()[e] - step * g.data()[e], 0.0, 1.0);
            pg_norm = std::max(pg_norm, std::fabs(res.v.data()[e] - moved) / step);
        }
        res.final_pg_norm = pg_norm;
        res.iters = it;
        if (pg_norm <= opts.grad_tol) {
            res.converged = true;
            res.F_value = f;
            return res;
        }

        fn.curvature_diagonal(res.v, D);
        for (std::size_t e = 0; e < g.size(); ++e) dir.data()[e] = g.data()[e] / D.data()[e];
        proj.zero_pinned(dir);

        double alpha = step;
        if (have_prev) {
            double num = 0.0, den = 0.0;
            for (std::size_t e = 0; e < g.size(); ++e) {
                const double dv = res.v.data()[e] - v_prev.data()[e];
                num += dv * dv;
                den += dv * (dir.data()[e] - dir_prev.data()[e]);
            }
            alpha = den > 0.0 ? std::clamp(num / den, 1e-12, 1e12) : step;
        }
        v_prev = res.v;
        dir_prev = dir;
        have_prev = true;

        bool accepted = false;
        while (true) {
            cand = res.v;
            for (std::size_t e = 0; e < cand.size(); ++e) cand.data()[e] -= alpha * dir.data()[e];
            proj.apply(cand);
            double decrease = 0.0;
            for (std::size_t e = 0; e < cand.size(); ++e)
                decrease += g.data()[e] * (res.v.data()[e] - cand.data()[e]);
            double fc;
            try {
                fc = fn.value(cand);
            } catch (const NumericsError& e) {
                throw NumericsError(std::string(e.what()) + " at iteration " + std::to_string(it));
            }
            if (decrease == 0.0) {
                // projection blocked the whole step; nothing left to move
                res.F_value = f;
                res.converged = pg_norm <= opts.grad_tol;
                return res;
            }
            if (fc <= f - opts.armijo_c * decrease) {
                res.v = cand;
                f = fc;
                step = alpha;
                accepted = true;
                break;
            }
            alpha *= opts.backtrack_factor;
            if (alpha < 1e-16) break;
        }
        if (!accepted) {
            res.F_value = f;
            res.converged = false;
            return res;
        }
        res.F_history.push_back(f);
    }

    res.F_value = f;
    res.iters = opts.max_iters;
    res.converged = false;
    return res;
}

/// Warm-started continuation over a strictly decreasing list of epsilons:
/// run l+1 starts from run l interpolated onto the new grid and projected.
inline std::vector<MinimizeResult> continuation_in_eps(
    const ProblemSpec& spec, const std::function<Grid(double)>& grid_builder,
    const std::vector<double>& eps_list, const MinimizeOptions& opts) {
    if (eps_list.empty()) throw std::invalid_argument("eps_list must be nonempty");
    const double eb = epsilon_bar(spec.growth);
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0) || eps_list[i] >= eb)
            throw std::invalid_argument("every eps must lie in (0, epsilon_bar)");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("eps_list must be strictly decreasing");
    }
    std::vector<MinimizeResult> results;
    results.reserve(eps_list.size());
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const Grid grid = grid_builder(eps_list[i]);
        std::optional<SpaceTimeField> init;
        if (!results.empty())
            init = interpolate_field(results.back().v, results.back().grid, grid);
        results.push_back(minimize(spec, grid, eps_list[i], std::move(init), opts));
    }
    return results;
}

}  // namespace gpwide
