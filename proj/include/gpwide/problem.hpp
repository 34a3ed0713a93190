#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gpwide/expr.hpp"
#include "gpwide/grid.hpp"

namespace gpwide {

/// Growth-envelope constants of the structural hypotheses: interaction
/// a_ij <= A1 e^{A2 t} U1, reaction |f_i| <= H1 e^{H2 t} U2, coupling
/// beta <= C1 e^{C2 t} U3, diffusion rho <= d_i <= D1 e^{D2 t} with
/// |d_i'| <= D3 d_i, reaction density R1 <= r_i <= R2, plus the L1 norms
/// of the envelope products.
struct GrowthConstants {
    double A1 = 0.0, A2 = 0.0;
    double H1 = 0.0, H2 = 0.0;
    double C1 = 0.0, C2 = 0.0;
    double D1 = 1.0, D2 = 0.0, D3 = 0.0;
    double R1 = 1.0, R2 = 1.0;
    double norm_U1U3 = 1.0;
    double norm_U2 = 1.0;

    void validate() const {
        if (A1 < 0 || H1 < 0 || C1 < 0 || norm_U1U3 < 0 || norm_U2 < 0)
            throw std::invalid_argument("growth constants A1, H1, C1, ||U1U3||, ||U2|| must be >= 0");
        if (A2 < 0 || H2 < 0 || C2 < 0 || D2 < 0 || D3 < 0)
            throw std::invalid_argument("growth rates A2, H2, C2, D2, D3 must be >= 0");
        if (!(D1 > 0)) throw std::invalid_argument("D1 must be > 0");
        if (!(R1 > 0) || !(R1 <= R2)) throw std::invalid_argument("need 0 < R1 <= R2");
    }
};

/// Admissibility threshold: every solver epsilon must satisfy
/// eps < 1 / (2 (A2 + H2 + C2 + D2 + 1)).
inline double epsilon_bar(const GrowthConstants& g) {
    g.validate();
    return 1.0 / (2.0 * (g.A2 + g.H2 + g.C2 + g.D2 + 1.0));
}

enum class BoundaryMode { DirichletTrace, Free };

/// Initial profile of one species: an expression over x or raw node samples.
using InitialProfile = std::variant<CoefficientExpr, std::vector<double>>;

/// Full system definition: species count, domain, coefficient expressions,
/// growth constants, initial data and boundary mode.
struct ProblemSpec {
    int k = 2;
    Domain domain = Domain::interval(0.0, 1.0);
    std::vector<CoefficientExpr> a;      // k*k, row-major, over (t, x)
    CoefficientExpr beta;                // over (t, x)
    std::vector<CoefficientExpr> d;      // k entries over t
    std::vector<CoefficientExpr> r;      // k entries over x
    std::vector<CoefficientExpr> f;      // k entries over (t, x, s)
    CoefficientExpr rho;                 // lower diffusion envelope, over t
    std::optional<CoefficientExpr> b_lower;  // envelope beta >= b(t)
    std::optional<double> mu_bar;            // a_ij >= mu_bar
    std::optional<double> mu;                // uniform-estimate extras
    std::optional<double> D4;
    std::optional<CoefficientExpr> U1, U2, U3;  // envelope expressions over x
    GrowthConstants growth;
    std::vector<InitialProfile> v0;      // k entries
    BoundaryMode boundary_mode = BoundaryMode::DirichletTrace;

    const CoefficientExpr& a_ij(int i, int j) const { return a[static_cast<std::size_t>(i) * k + j]; }

    double eval_a(int i, int j, double t, const Point& p) const { return a_ij(i, j)(t, p.x, 0.0); }
    double eval_beta(double t, const Point& p) const { return beta(t, p.x, 0.0); }
    double eval_d(int i, double t) const { return d[i](t, 0.0, 0.0); }
    double eval_r(int i, const Point& p) const { return r[i](0.0, p.x, 0.0); }
    double eval_rho(double t) const { return rho(t, 0.0, 0.0); }
    double eval_U1(const Point& p) const { return U1 ? (*U1)(0.0, p.x, 0.0) : 1.0; }
    double eval_U2(const Point& p) const { return U2 ? (*U2)(0.0, p.x, 0.0) : 1.0; }
    double eval_U3(const Point& p) const { return U3 ? (*U3)(0.0, p.x, 0.0) : 1.0; }

    /// Reaction term with the clamped s-extension f~(t,x,s) = f(t,x,clamp(s,0,1)),
    /// which preserves the sign conditions by continuity.
    double eval_f(int i, double t, const Point& p, double s) const {
        const double sc = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
        return f[i](t, p.x, sc);
    }

    bool f_is_zero(int i) const { return f[i].is_literal_zero(); }

    /// Initial profiles sampled on the grid's spatial nodes, clamped to [0,1]
    /// so the admissible-set pins are consistent.
    std::vector<std::vector<double>> sample_v0(const Grid& grid) const {
        std::vector<std::vector<double>> out(k);
        for (int i = 0; i < k; ++i) {
            out[i].resize(grid.num_nodes());
            if (std::holds_alternative<std::vector<double>>(v0[i])) {
                const auto& samples = std::get<std::vector<double>>(v0[i]);
                if (samples.size() != static_cast<std::size_t>(grid.num_nodes()))
                    throw std::invalid_argument("sampled v0 size does not match grid");
                out[i] = samples;
            } else {
                const auto& e = std::get<CoefficientExpr>(v0[i]);
                for (int j = 0; j < grid.num_nodes(); ++j)
                    out[i][j] = e(0.0, grid.node_point(j).x, 0.0);
            }
            for (double& u : out[i]) u = std::clamp(u, 0.0, 1.0);
        }
        return out;
    }

    void check_shape() const {
        if (k < 1) throw std::invalid_argument("species count must be >= 1");
        if (a.size() != static_cast<std::size_t>(k) * k)
            throw std::invalid_argument("interaction matrix must have k*k entries");
        if (d.size() != static_cast<std::size_t>(k) || r.size() != static_cast<std::size_t>(k) ||
            f.size() != static_cast<std::size_t>(k) || v0.size() != static_cast<std::size_t>(k))
            throw std::invalid_argument("d, r, f, v0 must each have k entries");
        growth.validate();
    }
};

struct Violation {
    std::string hypothesis;   // e.g. "ip1.symmetry"
    double t = 0.0;
    Point x;
    double s = 0.0;
    double observed = 0.0;
    double bound = 0.0;
};

struct ValidationReport {
    bool passed = true;
    double epsilon_bar = 0.0;
    std::vector<Violation> violations;

    std::string summary() const {
        std::ostringstream os;
        os << (passed ? "validation passed" : "validation failed") << ", epsilon_bar = " << epsilon_bar;
        for (const auto& v : violations) {
            os << "\n  " << v.hypothesis << " at t=" << v.t << " x=" << v.x.x;
            os << " s=" << v.s << ": observed " << v.observed << " vs bound " << v.bound;
        }
        return os.str();
    }
};

namespace detail {

// Centered time-difference with step 1e-5 * max(1, t); the left sample is
// clipped at t = 0 and the gap adjusted so coefficients are never evaluated
// at negative times.
template <typename F>
double time_derivative_fd(F&& fn, double t) {
    const double h = 1e-5 * std::max(1.0, t);
    const double tp = t + h;
    const double tm = std::max(0.0, t - h);
    return (fn(tp) - fn(tm)) / (tp - tm);
}

}  // namespace detail

/// Samples every structural hypothesis on a lattice with `sample_density`
/// points per axis. Sound but incomplete: a pass means no violation was found
/// at the sampled points. The time lattice covers the longest horizon any
/// admissible run can use.
inline ValidationReport validate_problem(const ProblemSpec& spec, int sample_density) {
    if (sample_density < 2) throw std::invalid_argument("sample_density must be >= 2");
    spec.check_shape();

    ValidationReport report;
    report.epsilon_bar = epsilon_bar(spec.growth);

    const double slack = 1e-9;  // absolute roundoff allowance on sampled bounds
    auto record = [&](const std::string& hyp, double t, Point p, double s, double obs, double bound) {
        report.violations.push_back(Violation{hyp, t, p, s, obs, bound});
    };

    const double c_max = std::max({spec.growth.A2 + spec.growth.C2, spec.growth.H2, spec.growth.D2});
    const double t_hi = truncation_horizon(report.epsilon_bar * 0.5, c_max, 1e-10);
    std::vector<double> ts(sample_density);
    for (int n = 0; n < sample_density; ++n) ts[n] = t_hi * n / (sample_density - 1);

    std::vector<Point> xs;
    const int nx = sample_density;
    if (spec.domain.dims == 1) {
        for (int j = 0; j < nx; ++j)
            xs.push_back(Point{spec.domain.x_lo +
                                   (spec.domain.x_hi - spec.domain.x_lo) * j / (nx - 1),
                               0.0});
    } else {
        for (int jy = 0; jy < nx; ++jy)
            for (int jx = 0; jx < nx; ++jx)
                xs.push_back(Point{
                    spec.domain.x_lo + (spec.domain.x_hi - spec.domain.x_lo) * jx / (nx - 1),
                    spec.domain.y_lo + (spec.domain.y_hi - spec.domain.y_lo) * jy / (nx - 1)});
    }

    const std::vector<double> s_low = {-2.0, -1.0, -0.5, 0.0};
    const std::vector<double> s_high = {1.0, 1.5, 2.0};

    try {
        // ip1: zero diagonal, symmetry, sign and growth of a_ij
        for (int i = 0; i < spec.k; ++i) {
            if (!spec.a_ij(i, i).is_literal_zero()) {
                for (double t : ts)
                    for (const Point& p : xs) {
                        const double v = spec.eval_a(i, i, t, p);
                        if (v != 0.0) {
                            record("ip1.zero_diagonal", t, p, 0, v, 0.0);
                            goto diag_done;
                        }
                    }
            }
        diag_done:;
        }
        for (int i = 0; i < spec.k; ++i)
            for (int j = i + 1; j < spec.k; ++j) {
                if (!(spec.a_ij(i, j) == spec.a_ij(j, i))) {
                    for (double t : ts)
                        for (const Point& p : xs) {
                            const double lhs = spec.eval_a(i, j, t, p);
                            const double rhs = spec.eval_a(j, i, t, p);
                            if (lhs != rhs) {
                                record("ip1.symmetry", t, p, 0, lhs - rhs, 0.0);
                                goto sym_done;
                            }
                        }
                }
            sym_done:;
            }
        for (int i = 0; i < spec.k; ++i)
            for (int j = 0; j < spec.k; ++j) {
                if (i == j) continue;
                for (double t : ts)
                    for (const Point& p : xs) {
                        const double v = spec.eval_a(i, j, t, p);
                        const double env = spec.growth.A1 * std::exp(spec.growth.A2 * t) * spec.eval_U1(p);
                        if (v < -slack) record("ip1.nonnegative", t, p, 0, v, 0.0);
                        if (v > env + slack * (1 + std::fabs(env)))
                            record("ip1.growth", t, p, 0, v, env);
                        const double dv = detail::time_derivative_fd(
                            [&](double tt) { return spec.eval_a(i, j, tt, p); }, t);
                        if (std::fabs(dv) > env + 1e-5 + slack * (1 + std::fabs(env)))
                            record("ip1.dt_growth", t, p, 0, std::fabs(dv), env);
                    }
            }

        // ip2: reaction sign conditions and growth
        for (int i = 0; i < spec.k; ++i)
            for (double t : ts)
                for (const Point& p : xs) {
                    for (double s : s_low) {
                        const double v = spec.eval_f(i, t, p, s);
                        if (v < -slack) record("ip2.sign_low", t, p, s, v, 0.0);
                    }
                    for (double s : s_high) {
                        const double v = spec.eval_f(i, t, p, s);
                        if (v > slack) record("ip2.sign_high", t, p, s, v, 0.0);
                    }
                    const double env = spec.growth.H1 * std::exp(spec.growth.H2 * t) * spec.eval_U2(p);
                    for (int q = 0; q < sample_density; ++q) {
                        const double s = static_cast<double>(q) / (sample_density - 1);
                        const double v = spec.eval_f(i, t, p, s);
                        if (std::fabs(v) > env + slack * (1 + std::fabs(env)))
                            record("ip2.growth", t, p, s, std::fabs(v), env);
                        const double dv = detail::time_derivative_fd(
                            [&](double tt) { return spec.eval_f(i, tt, p, s); }, t);
                        if (std::fabs(dv) > env + 1e-5 + slack * (1 + std::fabs(env)))
                            record("ip2.dt_growth", t, p, s, std::fabs(dv), env);
                    }
                }

        // ip5: beta sign and growth
        for (double t : ts)
            for (const Point& p : xs) {
                const double v = spec.eval_beta(t, p);
                const double env = spec.growth.C1 * std::exp(spec.growth.C2 * t) * spec.eval_U3(p);
                if (v < -slack) record("ip5.nonnegative", t, p, 0, v, 0.0);
                if (v > env + slack * (1 + std::fabs(env))) record("ip5.growth", t, p, 0, v, env);
                const double dv = detail::time_derivative_fd(
                    [&](double tt) { return spec.eval_beta(tt, p); }, t);
                if (std::fabs(dv) > env + 1e-5 + slack * (1 + std::fabs(env)))
                    record("ip5.dt_growth", t, p, 0, std::fabs(dv), env);
            }

        // ip6: diffusion envelopes and derivative bound
        for (int i = 0; i < spec.k; ++i)
            for (double t : ts) {
                const double v = spec.eval_d(i, t);
                const double lo = spec.eval_rho(t);
                const double hi = spec.growth.D1 * std::exp(spec.growth.D2 * t);
                if (v < lo - slack * (1 + std::fabs(lo))) record("ip6.lower", t, Point{}, 0, v, lo);
                if (v > hi + slack * (1 + std::fabs(hi))) record("ip6.upper", t, Point{}, 0, v, hi);
                const double dv = detail::time_derivative_fd(
                    [&](double tt) { return spec.eval_d(i, tt); }, t);
                const double dbound = spec.growth.D3 * v;
                if (std::fabs(dv) > dbound + 1e-5 + slack * (1 + dbound))
                    record("ip6.derivative", t, Point{}, 0, std::fabs(dv), dbound);
            }

        // ip7: reaction density bounds
        for (int i = 0; i < spec.k; ++i)
            for (const Point& p : xs) {
                const double v = spec.eval_r(i, p);
                if (v < spec.growth.R1 - slack) record("ip7.lower", 0, p, 0, v, spec.growth.R1);
                if (v > spec.growth.R2 + slack) record("ip7.upper", 0, p, 0, v, spec.growth.R2);
            }

        // ip11: initial data box bounds (sampled profiles are checked raw)
        for (int i = 0; i < spec.k; ++i) {
            if (std::holds_alternative<std::vector<double>>(spec.v0[i])) {
                const auto& samples = std::get<std::vector<double>>(spec.v0[i]);
                for (std::size_t j = 0; j < samples.size(); ++j) {
                    if (samples[j] < -slack || samples[j] > 1.0 + slack)
                        record("ip11.box", 0, Point{}, 0, samples[j], samples[j] < 0 ? 0.0 : 1.0);
                }
            } else {
                const auto& e = std::get<CoefficientExpr>(spec.v0[i]);
                for (const Point& p : xs) {
                    const double v = e(0.0, p.x, 0.0);
                    if (v < -slack || v > 1.0 + slack)
                        record("ip11.box", 0, p, 0, v, v < 0 ? 0.0 : 1.0);
                }
            }
        }
    } catch (const EvalError& err) {
        record(std::string("evaluation_error: ") + err.what(), 0, Point{}, 0, 0, 0);
    }

    report.passed = report.violations.empty();
    return report;
}

/// Composite-trapezoid approximation of the reaction antiderivative
/// F_i(t,x,s) = int_0^s f_i(t,x,l) dl with n_quad panels; exact for f affine
/// in s. Uses the clamped extension of f.
inline double antiderivative_F(const ProblemSpec& spec, int i, double t, const Point& x, double s,
                               int n_quad) {
    if (n_quad < 2) throw std::invalid_argument("antiderivative_F: n_quad must be >= 2");
    if (s == 0.0) return 0.0;
    const double step = s / n_quad;
    double sum = 0.5 * (spec.eval_f(i, t, x, 0.0) + spec.eval_f(i, t, x, s));
    for (int q = 1; q < n_quad; ++q) sum += spec.eval_f(i, t, x, q * step);
    return sum * step;
}

/// The diffusion regularization from the existence construction:
///   d_m(t) = e^{-D2 t} / (e^{-D2 t} + 1/m) * d(t) + 1/m,
/// returned as an expression tree so it can replace d_i in a ProblemSpec.
/// Satisfies 1/m <= d_m <= m D1 + 1 and d_m <= (D1 + 1) e^{D2 t}; the
/// derivative bound constant becomes D2 + D3.
inline CoefficientExpr regularize_diffusion(const CoefficientExpr& d_i, double D2, int m) {
    if (m < 1) throw std::invalid_argument("regularize_diffusion: m must be >= 1");
    using CE = CoefficientExpr;
    const CE t = CE::variable('t');
    const CE decay = CE::unary(UnaryOp::Exp,
                               CE::unary(UnaryOp::Neg, CE::binary(BinaryOp::Mul, CE::number(D2), t)));
    const CE inv_m = CE::number(1.0 / m);
    const CE frac = CE::binary(BinaryOp::Div, decay, CE::binary(BinaryOp::Add, decay, inv_m));
    return CE::binary(BinaryOp::Add, CE::binary(BinaryOp::Mul, frac, d_i), inv_m);
}

}  // namespace gpwide
