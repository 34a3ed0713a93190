#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gpwide/expr.hpp"

using gpwide::CoefficientExpr;
using gpwide::EvalError;
using gpwide::ParseError;

TEST_CASE("grammar cases from the reference table") {
    const auto e1 = CoefficientExpr::parse("2*exp(0.5*t)", "t");
    CHECK(e1(1.0, 0, 0) == Catch::Approx(2.0 * std::exp(0.5)).epsilon(1e-15));

    const auto e2 = CoefficientExpr::parse("x*(1-x)", "x");
    CHECK(e2(0, 0.5, 0) == Catch::Approx(0.25).margin(0));

    const auto e3 = CoefficientExpr::parse("min(1, s^2 + t)", "ts");
    CHECK(e3(0.5, 0, 1.0) == 1.0);  // min(1, 1.5)
}

TEST_CASE("evaluation basics and error paths") {
    CHECK(CoefficientExpr::parse("0", "")(0, 0, 0) == 0.0);
    CHECK(CoefficientExpr::parse("exp(t)", "t")(1, 0, 0) ==
          Catch::Approx(2.718281828459045).epsilon(1e-15));
    CHECK_THROWS_AS(CoefficientExpr::parse("1/(x-0.5)", "x")(0, 0.5, 0), EvalError);
    CHECK_THROWS_AS(CoefficientExpr::parse("sqrt(x-2)", "x")(0, 0.0, 0), EvalError);
    CHECK_THROWS_AS(CoefficientExpr::parse("exp(x)", "x")(0, 1e10, 0), EvalError);
}

TEST_CASE("precedence and associativity") {
    CHECK(CoefficientExpr::parse("2+3*4", "")() == 14.0);
    CHECK(CoefficientExpr::parse("2*3^2", "")() == 18.0);
    CHECK(CoefficientExpr::parse("2^3^2", "")() == 512.0);  // right associative
    CHECK(CoefficientExpr::parse("2^-1", "")() == 0.5);
    CHECK(CoefficientExpr::parse("-2-3", "")() == -5.0);
    CHECK(CoefficientExpr::parse("6/3/2", "")() == 1.0);  // left associative
    CHECK(CoefficientExpr::parse(" 1 +\t2\n*x ", "x")(0, 3, 0) == 7.0);  // whitespace-insensitive
}

TEST_CASE("parse errors carry a position") {
    try {
        CoefficientExpr::parse("1 + * 2", "");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);
    }
    CHECK_THROWS_AS(CoefficientExpr::parse("", ""), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("min(1)", ""), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("foo(1)", ""), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("1+2)", ""), ParseError);
}

TEST_CASE("undeclared variables are parse-time errors") {
    CHECK_THROWS_AS(CoefficientExpr::parse("s+1", "tx"), ParseError);
    CHECK_THROWS_AS(CoefficientExpr::parse("t", ""), ParseError);
    CHECK_NOTHROW(CoefficientExpr::parse("t*x*s", "txs"));
    try {
        CoefficientExpr::parse("2*s", "tx");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("undeclared variable 's'") != std::string::npos);
    }
}

namespace {

// random tree generator for the round-trip property
gpwide::CoefficientExpr random_expr(std::mt19937& rng, int depth) {
    using CE = CoefficientExpr;
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
    std::uniform_real_distribution<double> num(-3.0, 3.0);
    switch (pick(rng)) {
        case 0: return CE::number(std::round(num(rng) * 4) / 4);
        case 1: {
            const char vars[3] = {'t', 'x', 's'};
            return CE::variable(vars[rng() % 3]);
        }
        case 2: return CE::unary(gpwide::UnaryOp::Neg, random_expr(rng, depth - 1));
        case 3: return CE::unary(gpwide::UnaryOp::Sin, random_expr(rng, depth - 1));
        case 4:
            return CE::binary(gpwide::BinaryOp::Add, random_expr(rng, depth - 1),
                              random_expr(rng, depth - 1));
        case 5:
            return CE::binary(gpwide::BinaryOp::Sub, random_expr(rng, depth - 1),
                              random_expr(rng, depth - 1));
        case 6:
            return CE::binary(gpwide::BinaryOp::Mul, random_expr(rng, depth - 1),
                              random_expr(rng, depth - 1));
        case 7:
            return CE::binary(gpwide::BinaryOp::Min, random_expr(rng, depth - 1),
                              random_expr(rng, depth - 1));
        default:
            return CE::binary(gpwide::BinaryOp::Pow, random_expr(rng, depth - 1),
                              CE::number(static_cast<double>(rng() % 3)));
    }
}

}  // namespace

TEST_CASE("print/parse round-trip is stable") {
    std::vector<std::string> corpus = {
        "2*exp(0.5*t)", "x*(1-x)",      "min(1, s^2 + t)", "max(0, 1-t)",
        "-x^2",         "(-x)^2",       "-(x^2)",          "1/(1+t)",
        "abs(x-0.5)",   "sqrt(x+1)",    "cos(t)*sin(x)",   "2^3^2",
        "1e-3*t",       "1.5E2",        ".5*x",            "t-x-s",
        "t/x/2",        "t^2*x",        "exp(-t)",         "min(max(t,x),s)",
    };
    std::mt19937 rng(20240817);
    for (int i = 0; i < 40; ++i) corpus.push_back(random_expr(rng, 4).to_string());
    REQUIRE(corpus.size() >= 50);

    for (const std::string& src : corpus) {
        CAPTURE(src);
        const auto once = CoefficientExpr::parse(src, "txs");
        const std::string printed = once.to_string();
        CAPTURE(printed);
        const auto twice = CoefficientExpr::parse(printed, "txs");
        CHECK(once == twice);
        CHECK(twice.to_string() == printed);
    }
}

TEST_CASE("structural helpers") {
    CHECK(CoefficientExpr::parse("0", "").is_literal_zero());
    CHECK_FALSE(CoefficientExpr::parse("0*t", "t").is_literal_zero());
    CHECK(CoefficientExpr::parse("exp(t)*x", "txs").references('t'));
    CHECK_FALSE(CoefficientExpr::parse("exp(t)*x", "txs").references('s'));
    CHECK(CoefficientExpr::parse("1", "") == CoefficientExpr::parse("1", ""));
    CHECK_FALSE(CoefficientExpr::parse("1", "") == CoefficientExpr::parse("2", ""));
}
