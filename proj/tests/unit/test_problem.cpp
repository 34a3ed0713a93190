#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gpwide/problem.hpp"

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

}  // namespace

TEST_CASE("epsilon_bar formula") {
    GrowthConstants g;
    CHECK(epsilon_bar(g) == Catch::Approx(0.5).margin(0));
    g.A2 = 1.0;
    g.C2 = 1.0;
    CHECK(epsilon_bar(g) == Catch::Approx(1.0 / 6.0).epsilon(1e-15));
    GrowthConstants q;
    q.A2 = q.H2 = q.C2 = q.D2 = 0.25;
    CHECK(epsilon_bar(q) == Catch::Approx(0.25).margin(0));
}

TEST_CASE("epsilon_bar is nonincreasing in each growth rate") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    const auto bumps = std::vector<void (*)(GrowthConstants&, double)>{
        [](GrowthConstants& g, double h) { g.A2 += h; },
        [](GrowthConstants& g, double h) { g.H2 += h; },
        [](GrowthConstants& g, double h) { g.C2 += h; },
        [](GrowthConstants& g, double h) { g.D2 += h; },
    };
    for (int trial = 0; trial < 100; ++trial) {
        GrowthConstants g;
        g.A2 = u(rng);
        g.H2 = u(rng);
        g.C2 = u(rng);
        g.D2 = u(rng);
        const double base = epsilon_bar(g);
        for (const auto& bump : bumps) {
            GrowthConstants bumped = g;
            bump(bumped, u(rng) + 0.1);
            CHECK(epsilon_bar(bumped) <= base);
        }
    }
}

TEST_CASE("growth constant invariants") {
    GrowthConstants g;
    g.R1 = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GrowthConstants{};
    g.D1 = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GrowthConstants{};
    g.A2 = -1.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("validate_problem on the canonical system") {
    const ProblemSpec spec = canonical_problem();
    const ValidationReport report = validate_problem(spec, 9);
    CAPTURE(report.summary());
    CHECK(report.passed);
    CHECK(report.epsilon_bar == Catch::Approx(0.5));
}

TEST_CASE("validate_problem flags asymmetry") {
    ProblemSpec spec = canonical_problem();
    spec.a[1] = CoefficientExpr::parse("1", "tx");
    spec.a[2] = CoefficientExpr::parse("2", "tx");
    const ValidationReport report = validate_problem(spec, 5);
    CHECK_FALSE(report.passed);
    bool found = false;
    for (const auto& v : report.violations) found = found || v.hypothesis == "ip1.symmetry";
    CHECK(found);
}

TEST_CASE("validate_problem flags initial data above one") {
    ProblemSpec spec = canonical_problem();
    spec.v0[0] = CoefficientExpr::parse("2*x", "x");
    const ValidationReport report = validate_problem(spec, 5);
    CHECK_FALSE(report.passed);
    bool found = false;
    for (const auto& v : report.violations) found = found || v.hypothesis == "ip11.box";
    CHECK(found);
}

TEST_CASE("validate_problem checks reaction signs through the clamped extension") {
    ProblemSpec spec = canonical_problem();
    // f = s - 0.2: negative at s=0 violates the low-side sign condition
    spec.f[0] = CoefficientExpr::parse("s-0.2", "txs");
    spec.growth.H1 = 1.0;
    const ValidationReport report = validate_problem(spec, 5);
    CHECK_FALSE(report.passed);
    bool found = false;
    for (const auto& v : report.violations) found = found || v.hypothesis == "ip2.sign_low";
    CHECK(found);
}

TEST_CASE("clamped extension respects the endpoint signs") {
    ProblemSpec spec = canonical_problem();
    spec.f[0] = CoefficientExpr::parse("0.5*(1-2*s)", "txs");
    spec.f[1] = CoefficientExpr::parse("max(0, 0.25-s)", "txs");
    spec.growth.H1 = 0.5;
    for (double t : {0.0, 0.7, 3.0})
        for (double x : {0.0, 0.31, 1.0})
            for (int i = 0; i < 2; ++i) {
                CHECK(spec.eval_f(i, t, Point{x, 0}, 0.0) >= 0.0);
                CHECK(spec.eval_f(i, t, Point{x, 0}, 1.0) <= 0.0);
                // clamp: values outside [0,1] coincide with the endpoints
                CHECK(spec.eval_f(i, t, Point{x, 0}, -3.0) == spec.eval_f(i, t, Point{x, 0}, 0.0));
                CHECK(spec.eval_f(i, t, Point{x, 0}, 2.0) == spec.eval_f(i, t, Point{x, 0}, 1.0));
            }
}

TEST_CASE("reaction antiderivative frozen values") {
    ProblemSpec spec = canonical_problem();
    SECTION("zero reaction") {
        for (double s : {0.0, 0.3, 1.0})
            CHECK(antiderivative_F(spec, 0, 0.0, Point{0.5, 0}, s, 8) == 0.0);
    }
    SECTION("affine reaction is integrated exactly") {
        spec.f[0] = CoefficientExpr::parse("1-2*s", "txs");
        CHECK(antiderivative_F(spec, 0, 0.0, Point{0.5, 0}, 1.0, 2) == Catch::Approx(0.0).margin(1e-15));
        CHECK(antiderivative_F(spec, 0, 0.0, Point{0.5, 0}, 0.5, 2) == Catch::Approx(0.25).epsilon(1e-15));
        // independent trapezoid, many panels, same value (exactness for affine f)
        CHECK(antiderivative_F(spec, 0, 0.0, Point{0.5, 0}, 0.5, 64) ==
              Catch::Approx(0.25).epsilon(1e-15));
    }
    SECTION("n_quad below two is rejected") {
        CHECK_THROWS_AS(antiderivative_F(spec, 0, 0.0, Point{0.5, 0}, 1.0, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("diffusion regularization") {
    const auto d1 = CoefficientExpr::parse("1", "t");

    SECTION("frozen example values") {
        const auto dm = regularize_diffusion(d1, 0.0, 1);
        for (double t : {0.0, 1.0, 5.0}) CHECK(dm(t, 0, 0) == Catch::Approx(1.5).epsilon(1e-15));

        const auto dm_large = regularize_diffusion(d1, 0.0, 1000000);
        CHECK(dm_large(0.0, 0, 0) == Catch::Approx(1.0).margin(3e-6));

        const auto de = regularize_diffusion(CoefficientExpr::parse("exp(t)", "t"), 1.0, 1);
        CHECK(de(0.0, 0, 0) == Catch::Approx(1.5).epsilon(1e-15));
    }

    SECTION("proof inequalities hold on a sampled horizon") {
        const auto d = CoefficientExpr::parse("0.5*exp(0.3*t)", "t");
        const double D1 = 0.5, D2 = 0.3;
        for (int m : {1, 10, 100}) {
            const auto dm = regularize_diffusion(d, D2, m);
            for (int q = 0; q <= 200; ++q) {
                const double t = 10.0 * q / 200;
                const double v = dm(t, 0, 0);
                REQUIRE(v >= 1.0 / m - 1e-12);
                REQUIRE(v <= m * D1 + 1.0 + 1e-12);
                REQUIRE(v <= (D1 + 1.0) * std::exp(D2 * t) + 1e-12);
            }
        }
    }

    SECTION("round-trips through the printer") {
        const auto dm = regularize_diffusion(CoefficientExpr::parse("exp(0.2*t)", "t"), 0.2, 10);
        const auto reparsed = CoefficientExpr::parse(dm.to_string(), "t");
        CHECK(reparsed == dm);
    }
}

TEST_CASE("sampled v0 profiles") {
    ProblemSpec spec = canonical_problem();
    Grid g = Grid::make_1d(0.0, 1.0, 4, 1.0, 2);
    spec.v0[0] = std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto samples = spec.sample_v0(g);
    CHECK(samples[0][2] == 0.5);
    CHECK(samples[1][2] == 0.5);
    spec.v0[0] = std::vector<double>{0.0, 1.0};
    CHECK_THROWS_AS(spec.sample_v0(g), std::invalid_argument);
}
