#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gpwide/functional.hpp"
#include "gpwide/minimize.hpp"

using namespace gpwide;

namespace {

ProblemSpec canonical_problem(BoundaryMode mode = BoundaryMode::DirichletTrace) {
    ProblemSpec spec;
    spec.k = 2;
    spec.domain = Domain::interval(0.0, 1.0);
    spec.a = {CoefficientExpr::parse("0", "tx"), CoefficientExpr::parse("1", "tx"),
              CoefficientExpr::parse("1", "tx"), CoefficientExpr::parse("0", "tx")};
    spec.beta = CoefficientExpr::parse("1", "tx");
    spec.d = {CoefficientExpr::parse("1", "t"), CoefficientExpr::parse("1", "t")};
    spec.r = {CoefficientExpr::parse("1", "x"), CoefficientExpr::parse("1", "x")};
    spec.f = {CoefficientExpr::parse("0", "txs"), CoefficientExpr::parse("0", "txs")};
    spec.rho = CoefficientExpr::parse("1", "t");
    spec.growth.A1 = 1.0;
    spec.growth.C1 = 1.0;
    spec.v0 = {CoefficientExpr::parse("x", "x"), CoefficientExpr::parse("1-x", "x")};
    spec.boundary_mode = mode;
    return spec;
}

SpaceTimeField constant_in_time(const ProblemSpec& spec, const Grid& grid) {
    const auto v0 = spec.sample_v0(grid);
    SpaceTimeField v(spec.k, grid.num_time_nodes(), grid.num_nodes());
    for (int i = 0; i < spec.k; ++i)
        for (int n = 0; n < grid.num_time_nodes(); ++n)
            for (int j = 0; j < grid.num_nodes(); ++j) v.at(i, n, j) = v0[i][j];
    return v;
}

SpaceTimeField random_admissible(const ProblemSpec& spec, const Grid& grid, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpaceTimeField v(spec.k, grid.num_time_nodes(), grid.num_nodes());
    for (double& x : v.data()) x = u(rng);
    return project_admissible(v, spec, grid);
}

bool is_pinned(const ProblemSpec& spec, const Grid& grid, int n, int j) {
    if (n == 0) return true;
    return spec.boundary_mode == BoundaryMode::DirichletTrace && grid.is_boundary_node(j);
}

/// central finite-difference oracle for the gradient, checked entrywise
void check_gradient_against_fd(const ProblemSpec& spec, const Grid& grid, double eps,
                               const SpaceTimeField& v, double rel_tol) {
    WideFunctional fn(spec, grid, eps);
    const SpaceTimeField g = fn.gradient(v);
    const double delta = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < spec.k; ++i)
        for (int n = 0; n < grid.num_time_nodes(); ++n)
            for (int j = 0; j < grid.num_nodes(); ++j) {
                if (is_pinned(spec, grid, n, j)) continue;
                SpaceTimeField vp = v, vm = v;
                vp.at(i, n, j) += delta;
                vm.at(i, n, j) -= delta;
                const double fd = (fn.value(vp) - fn.value(vm)) / (2.0 * delta);
                const double an = g.at(i, n, j);
                const double scale = std::max({std::fabs(fd), std::fabs(an), 1e-10});
                worst = std::max(worst, std::fabs(fd - an) / scale);
            }
    CHECK(worst < rel_tol);
}

}  // namespace

TEST_CASE("canonical functional value at the constant-in-time competitor") {
    // closed form: int |grad v0|^2 = 2, int x^2 (1-x)^2 = 1/30, weight mass 1 - e^{-T/eps}
    const ProblemSpec spec = canonical_problem();
    const double eps = 0.1;
    const Grid grid = Grid::make_1d(0.0, 1.0, 64, 2.0, 128);
    const SpaceTimeField v = constant_in_time(spec, grid);
    const double mass = 1.0 - std::exp(-grid.t_max() / eps);
    const double expected = (2.0 + 1.0 / 30.0) * mass;
    const double got = evaluate_F_eps(v, spec, grid, eps);
    CHECK(got == Catch::Approx(expected).epsilon(2e-4));  // trapezoid O(h^2) on the quartic
}

TEST_CASE("zero data gives a zero functional") {
    ProblemSpec spec = canonical_problem(BoundaryMode::Free);
    spec.v0 = {CoefficientExpr::parse("0", "x"), CoefficientExpr::parse("0", "x")};
    const Grid grid = Grid::make_1d(0.0, 1.0, 8, 1.0, 8);
    const SpaceTimeField v(spec.k, grid.num_time_nodes(), grid.num_nodes());
    CHECK(evaluate_F_eps(v, spec, grid, 0.1) == 0.0);
}

TEST_CASE("admissibility pins are enforced") {
    const ProblemSpec spec = canonical_problem();
    const Grid grid = Grid::make_1d(0.0, 1.0, 8, 1.0, 8);
    SpaceTimeField v = constant_in_time(spec, grid);
    v.at(0, 0, 3) += 0.25;  // tamper with the initial slice
    CHECK_THROWS_AS(evaluate_F_eps(v, spec, grid, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_F_eps(constant_in_time(spec, grid), spec, grid, 0.6),
                    std::invalid_argument);  // eps above the threshold
}

TEST_CASE("functional lower bound holds discretely") {
    ProblemSpec spec = canonical_problem();
    spec.f = {CoefficientExpr::parse("0.5-s", "txs"), CoefficientExpr::parse("0.5-s", "txs")};
    spec.growth.H1 = 0.5;
    const double M1 = 4.0 * spec.k * spec.growth.H1 * spec.growth.norm_U2;
    const Grid grid = Grid::make_1d(0.0, 1.0, 16, 1.0, 16);
    for (unsigned seed = 1; seed <= 20; ++seed) {
        const SpaceTimeField v = random_admissible(spec, grid, seed);
        CHECK(evaluate_F_eps(v, spec, grid, 0.1) >= -M1 - 1e-10 * M1);
    }
}

TEST_CASE("upper bound at the initial competitor") {
    // F(v0) <= 2 (D1 |grad v0|^2 + 2 k H1 ||U2|| + k^2 C1 A1 ||U1U3|| / 2)
    ProblemSpec spec = canonical_problem();
    spec.f = {CoefficientExpr::parse("0.25*(1-2*s)", "txs"),
              CoefficientExpr::parse("0.25*(1-2*s)", "txs")};
    spec.growth.H1 = 0.25;
    const Grid grid = Grid::make_1d(0.0, 1.0, 32, 2.0, 64);
    const SpaceTimeField v = constant_in_time(spec, grid);
    double grad_sq = 0.0;
    for (int i = 0; i < spec.k; ++i)
        for (double c : discrete_gradient_sq(v, grid, i, 0)) grad_sq += grid.hx() * c;
    const auto& g = spec.growth;
    const double M2 = 2.0 * (g.D1 * grad_sq + 2.0 * spec.k * g.H1 * g.norm_U2 +
                             0.5 * spec.k * spec.k * g.C1 * g.A1 * g.norm_U1U3);
    for (double eps : {0.1, 0.05, 0.02})
        CHECK(evaluate_F_eps(v, spec, grid, eps) <= M2 + 1e-10 * M2);
}

TEST_CASE("gradient matches central finite differences") {
    SECTION("canonical coupling, dirichlet pins, 2x4x4 and 2x8x8") {
        const ProblemSpec spec = canonical_problem();
        for (int size : {4, 8}) {
            const Grid grid = Grid::make_1d(0.0, 1.0, size, 0.5, size);
            check_gradient_against_fd(spec, grid, 0.1, random_admissible(spec, grid, 42), 1e-5);
        }
    }
    SECTION("affine reaction term (exactly integrable antiderivative)") {
        ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        spec.f = {CoefficientExpr::parse("0.5*(1-2*s)*exp(-t)", "txs"),
                  CoefficientExpr::parse("0.25-0.25*s", "txs")};
        spec.growth.H1 = 0.5;
        const Grid grid = Grid::make_1d(0.0, 1.0, 6, 0.5, 6);
        check_gradient_against_fd(spec, grid, 0.1, random_admissible(spec, grid, 7), 1e-5);
    }
    SECTION("smooth nonlinear reaction term") {
        ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        spec.f = {CoefficientExpr::parse("sin(1-2*s)", "txs"),
                  CoefficientExpr::parse("0.5*cos(s)*(1-2*s)", "txs")};
        spec.growth.H1 = 1.0;
        const Grid grid = Grid::make_1d(0.0, 1.0, 5, 0.5, 5);
        check_gradient_against_fd(spec, grid, 0.1, random_admissible(spec, grid, 3), 1e-5);
    }
    SECTION("two-dimensional rectangle") {
        ProblemSpec spec = canonical_problem();
        spec.domain = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
        spec.beta = CoefficientExpr::parse("1+0.5*x", "tx");
        spec.growth.C1 = 1.5;
        spec.v0 = {CoefficientExpr::parse("x*(1-x)", "x"), CoefficientExpr::parse("0.5", "x")};
        const Grid grid = Grid::make(spec.domain, 3, 3, 0.5, 3);
        check_gradient_against_fd(spec, grid, 0.1, random_admissible(spec, grid, 11), 1e-5);
    }
}

TEST_CASE("linear profiles are discretely harmonic") {
    ProblemSpec spec = canonical_problem();
    spec.k = 1;
    spec.a = {CoefficientExpr::parse("0", "tx")};
    spec.beta = CoefficientExpr::parse("0", "tx");
    spec.growth.A1 = spec.growth.C1 = 0.0;
    spec.d = {CoefficientExpr::parse("1", "t")};
    spec.r = {CoefficientExpr::parse("1", "x")};
    spec.f = {CoefficientExpr::parse("0", "txs")};
    spec.v0 = {CoefficientExpr::parse("x", "x")};
    const Grid grid = Grid::make_1d(0.0, 1.0, 8, 1.0, 8);
    const SpaceTimeField v = constant_in_time(spec, grid);
    const SpaceTimeField g = gradient_F_eps(v, spec, grid, 0.1);
    for (int n = 1; n < grid.num_time_nodes(); ++n)
        for (int j = 1; j < grid.num_nodes() - 1; ++j)
            CHECK(std::fabs(g.at(0, n, j)) < 1e-12);
}

TEST_CASE("strong-form residual") {
    SECTION("v = e^t solves -d_tt v + d_t v = 0 up to O(dt^2)") {
        ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        spec.k = 1;
        spec.a = {CoefficientExpr::parse("0", "tx")};
        spec.beta = CoefficientExpr::parse("0", "tx");
        spec.growth.A1 = spec.growth.C1 = 0.0;
        spec.d = {CoefficientExpr::parse("0", "t")};
        spec.rho = CoefficientExpr::parse("0", "t");
        spec.r = {CoefficientExpr::parse("1", "x")};
        spec.f = {CoefficientExpr::parse("0", "txs")};
        spec.v0 = {CoefficientExpr::parse("1", "x")};

        double prev_max = 0.0;
        for (int m : {16, 32}) {
            const Grid grid = Grid::make_1d(0.0, 1.0, 4, 1.0, m);
            SpaceTimeField v(1, grid.num_time_nodes(), grid.num_nodes());
            for (int n = 0; n < grid.num_time_nodes(); ++n)
                for (int j = 0; j < grid.num_nodes(); ++j)
                    v.at(0, n, j) = std::exp(grid.time_node(n));
            const SpaceTimeField res = el_residual(v, spec, grid, 1.0);  // eps * r = 1
            double worst = 0.0;
            for (int n = 1; n < grid.m(); ++n)
                for (int j = 1; j < grid.num_nodes() - 1; ++j)
                    worst = std::max(worst, std::fabs(res.at(0, n, j)));
            CHECK(worst < 3.0 * std::exp(1.0) * grid.dt() * grid.dt());
            if (prev_max > 0.0) CHECK(prev_max / worst > 3.0);  // second order
            prev_max = worst;
        }
    }
    SECTION("zero field with compatible reaction has zero residual") {
        ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        spec.f = {CoefficientExpr::parse("0*s", "txs"), CoefficientExpr::parse("0", "txs")};
        spec.v0 = {CoefficientExpr::parse("0", "x"), CoefficientExpr::parse("0", "x")};
        const Grid grid = Grid::make_1d(0.0, 1.0, 8, 1.0, 8);
        const SpaceTimeField v(2, grid.num_time_nodes(), grid.num_nodes());
        const SpaceTimeField res = el_residual(v, spec, grid, 0.1);
        for (double x : res.data()) CHECK(x == 0.0);
    }
}

TEST_CASE("energy traces") {
    const double eps = 0.1;

    SECTION("stationary field has zero inertia everywhere") {
        const ProblemSpec spec = canonical_problem();
        const Grid grid = Grid::make_1d(0.0, 1.0, 8, 1.0, 16);
        const EnergyReport rep = energy_traces(constant_in_time(spec, grid), spec, grid, eps);
        for (double v : rep.I) CHECK(v == 0.0);
    }

    SECTION("E[0] reproduces the functional value") {
        const ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        const Grid grid = Grid::make_1d(0.0, 1.0, 12, 1.0, 24);
        const SpaceTimeField v = random_admissible(spec, grid, 5);
        const EnergyReport rep = energy_traces(v, spec, grid, eps);
        CHECK(rep.E.front() == Catch::Approx(rep.F_eps).epsilon(1e-12));
    }

    SECTION("time-independent coefficients give Q identically zero") {
        const ProblemSpec spec = canonical_problem();
        const Grid grid = Grid::make_1d(0.0, 1.0, 8, 1.0, 16);
        const EnergyReport rep =
            energy_traces(random_admissible(spec, grid, 9), spec, grid, eps);
        for (double q : rep.Q) CHECK(q == 0.0);
    }

    SECTION("energy identity residual halves with dt on a smooth field") {
        const ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        std::vector<double> maxres;
        for (int m : {32, 64, 128}) {
            const Grid grid = Grid::make_1d(0.0, 1.0, 16, 1.0, m);
            const auto v0 = spec.sample_v0(grid);
            SpaceTimeField v(spec.k, grid.num_time_nodes(), grid.num_nodes());
            for (int i = 0; i < spec.k; ++i)
                for (int n = 0; n < grid.num_time_nodes(); ++n)
                    for (int j = 0; j < grid.num_nodes(); ++j)
                        v.at(i, n, j) = v0[i][j] * std::exp(-grid.time_node(n));
            const EnergyReport rep = energy_traces(v, spec, grid, eps);
            double worst = 0.0;
            for (std::size_t n = 0; n + 1 < rep.ode_residual.size(); ++n)
                worst = std::max(worst, std::fabs(rep.ode_residual[n]));
            maxres.push_back(worst);
        }
        CHECK(maxres[0] / maxres[1] > 1.4);
        CHECK(maxres[0] / maxres[1] < 2.6);
        CHECK(maxres[1] / maxres[2] > 1.4);
        CHECK(maxres[1] / maxres[2] < 2.6);
    }

    SECTION("Q obeys the derivative-correction bound on a time-dependent problem") {
        ProblemSpec spec = canonical_problem(BoundaryMode::Free);
        spec.d = {CoefficientExpr::parse("1+0.25*sin(t)", "t"),
                  CoefficientExpr::parse("1+0.25*sin(t)", "t")};
        spec.rho = CoefficientExpr::parse("0.5", "t");
        spec.beta = CoefficientExpr::parse("1+0.5*cos(t)", "tx");
        spec.a = {CoefficientExpr::parse("0", "tx"), CoefficientExpr::parse("1+0.1*sin(t)", "tx"),
                  CoefficientExpr::parse("1+0.1*sin(t)", "tx"), CoefficientExpr::parse("0", "tx")};
        spec.f = {CoefficientExpr::parse("0.2*(1-2*s)*exp(-t)", "txs"),
                  CoefficientExpr::parse("0.2*(1-2*s)*exp(-t)", "txs")};
        spec.growth.D1 = 1.25;
        spec.growth.D3 = 0.3;
        spec.growth.H1 = 0.2;
        spec.growth.C1 = 1.5;
        spec.growth.A1 = 1.1;
        const Grid grid = Grid::make_1d(0.0, 1.0, 12, 1.5, 32);
        const double bc_M1 = 4.0 * (spec.growth.D3 + 1.0) * spec.k * spec.growth.H1 * 1.0 +
                             2.0 * spec.k * spec.k * spec.growth.C1 * spec.growth.A1 * 1.0;
        const double bc_M2 = spec.growth.A2 + spec.growth.C2 + spec.growth.H2 + 1.0;
        const EnergyReport rep =
            energy_traces(random_admissible(spec, grid, 21), spec, grid, eps);
        for (std::size_t n = 0; n < rep.Q.size(); ++n) {
            const double bound = spec.growth.D3 * rep.E[n] +
                                 bc_M1 * std::exp(bc_M2 * grid.time_node(static_cast<int>(n)));
            CHECK(std::fabs(rep.Q[n]) <= bound + 1e-7 * (1.0 + std::fabs(bound)));
        }
    }
}

TEST_CASE("parallel evaluation matches the serial path") {
    const ProblemSpec spec = canonical_problem();
    // large enough to cross the data-parallel threshold
    const Grid grid = Grid::make_1d(0.0, 1.0, 63, 2.0, 160);
    const SpaceTimeField v = random_admissible(spec, grid, 33);

    set_thread_cap(1);
    const double f_serial = evaluate_F_eps(v, spec, grid, 0.1);
    const SpaceTimeField g_serial = gradient_F_eps(v, spec, grid, 0.1);
    set_thread_cap(4);
    const double f_par = evaluate_F_eps(v, spec, grid, 0.1);
    const SpaceTimeField g_par = gradient_F_eps(v, spec, grid, 0.1);
    set_thread_cap(1);

    CHECK(f_par == f_serial);  // per-interval partials are summed in fixed order
    double worst = 0.0;
    for (std::size_t e = 0; e < g_serial.size(); ++e)
        worst = std::max(worst, std::fabs(g_serial.data()[e] - g_par.data()[e]));
    CHECK(worst < 1e-13);
}
