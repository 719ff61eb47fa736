#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bmin/expr.hpp"
#include "bmin/numerics.hpp"

using namespace bmin;
using namespace bmin::expr;

namespace {

double eval1(const Expr& e, double x) { return e.eval(std::span<const double>(&x, 1)); }

}  // namespace

TEST_CASE("parse basics and grammar cases") {
    const Expr e1 = parse("-log(cos(x))", {"x"});
    CHECK(e1.kind() == NodeKind::Unary);
    CHECK(e1.str() == "-log(cos(x))");

    const Expr e2 = parse("x + y*2", {"x", "y"});
    CHECK(e2.str() == "x+y*2");  // * binds tighter than +
    const double v2[2] = {1.0, 2.0};
    CHECK(e2.eval(v2) == doctest::Approx(5.0).epsilon(1e-15));

    // ^ is right-associative and binds tighter than unary minus.
    CHECK(eval1(parse("2^3^2", {"x"}), 0.0) == doctest::Approx(512.0));
    CHECK(eval1(parse("-x^2", {"x"}), 3.0) == doctest::Approx(-9.0));
    CHECK(eval1(parse("2^-1", {"x"}), 0.0) == doctest::Approx(0.5));
    CHECK(eval1(parse("(1+2)*3", {"x"}), 0.0) == doctest::Approx(9.0));
    CHECK(eval1(parse("  1.5e2 ", {"x"}), 0.0) == doctest::Approx(150.0));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse("3*q", {"x", "y"}), ParseError);
    try {
        parse("3*q", {"x", "y"});
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("'q'") != std::string::npos);
        CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(parse("", {"x"}), ParseError);
    CHECK_THROWS_AS(parse("   ", {"x"}), ParseError);
    CHECK_THROWS_AS(parse("x +", {"x"}), ParseError);
    CHECK_THROWS_AS(parse("(x", {"x"}), ParseError);
    CHECK_THROWS_AS(parse("x y", {"x", "y"}), ParseError);
    CHECK_THROWS_AS(parse("sin x", {"x"}), ParseError);  // functions need parentheses
    CHECK_THROWS_AS(parse("+x", {"x"}), ParseError);
    CHECK_THROWS_AS(parse("x..2", {"x"}), ParseError);
}

TEST_CASE("eval values and domain errors") {
    CHECK(eval1(parse("-log(cos(x))", {"x"}), 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(eval1(parse("-log(cos(x))", {"x"}), std::numbers::pi / 3) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));

    CHECK(eval(parse("x + y*2", {"x", "y"}), {{"x", 1.0}, {"y", 2.0}}) == doctest::Approx(5.0));

    CHECK_THROWS_AS(eval1(parse("log(x)", {"x"}), -1.0), EvalError);
    CHECK_THROWS_AS(eval1(parse("sqrt(x)", {"x"}), -1.0), EvalError);
    CHECK_THROWS_AS(eval1(parse("1/x", {"x"}), 0.0), EvalError);
    CHECK_THROWS_AS(eval1(parse("x^0.5", {"x"}), -2.0), EvalError);
    try {
        eval1(parse("1 + log(0-x)", {"x"}), 1.0);
        CHECK(false);
    } catch (const EvalError& e) {
        CHECK(e.subexpression() == "log(0-x)");
    }

    // Missing binding only matters for variables that occur.
    const Expr e = parse("x*2", {"x", "y"});
    CHECK(eval(e, {{"x", 3.0}}) == doctest::Approx(6.0));
    CHECK_THROWS_AS(eval(e, {{"y", 3.0}}), EvalError);
}

TEST_CASE("differentiate exact rules") {
    const Expr dy = differentiate(parse("y", {"x", "y"}), "y");
    CHECK(eval(dy, {{"x", 7.0}, {"y", -3.0}}) == doctest::Approx(1.0));

    const Expr de = differentiate(parse("exp(2*y)", {"y"}), "y");
    CHECK(eval(de, {{"y", 0.0}}) == doctest::Approx(2.0).epsilon(1e-15));

    // d/dx(-log cos x) = tan x; frozen oracle value tan(pi/4) = 1, cross-checked by a
    // central finite difference.
    const Expr g = parse("-log(cos(x))", {"x"});
    const Expr dg = differentiate(g, "x");
    const double x0 = std::numbers::pi / 4;
    CHECK(eval1(dg, x0) == doctest::Approx(1.0).epsilon(1e-12));
    const double hfd = 1e-6;
    const double fd = (eval1(g, x0 + hfd) - eval1(g, x0 - hfd)) / (2.0 * hfd);
    CHECK(eval1(dg, x0) == doctest::Approx(fd).epsilon(1e-8));

    CHECK_THROWS_AS(differentiate(g, "z"), std::invalid_argument);
}

namespace {

// Random expression trees restricted to inputs that keep every subtree in-domain:
// log/sqrt arguments are wrapped as (1 + small^2-ish), exponents are small integers.
Expr random_expr(Rng& rng, int depth, const std::vector<std::string>& vars) {
    const auto leaf = [&]() -> std::string {
        if (rng.uniform() < 0.5) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", rng.uniform(0.1, 2.0));
            return buf;
        }
        return vars[static_cast<std::size_t>(rng.bits() % vars.size())];
    };
    std::function<std::string(int)> gen = [&](int d) -> std::string {
        if (d <= 0) return leaf();
        switch (rng.bits() % 8) {
            case 0: return "(" + gen(d - 1) + "+" + gen(d - 1) + ")";
            case 1: return "(" + gen(d - 1) + "-" + gen(d - 1) + ")";
            case 2: return "(" + gen(d - 1) + "*" + gen(d - 1) + ")";
            case 3: return "(" + gen(d - 1) + "/(2+sin(" + gen(d - 1) + ")))";
            case 4: return "sin(" + gen(d - 1) + ")";
            case 5: return "cos(" + gen(d - 1) + ")";
            case 6: return "exp(0.3*sin(" + gen(d - 1) + "))";
            default: return "log(1.5+sin(" + gen(d - 1) + "))";
        }
    };
    return parse(gen(depth), vars);
}

}  // namespace

TEST_CASE("derivative matches central finite differences on random expressions") {
    Rng rng(20240817);
    const std::vector<std::string> vars = {"x", "y"};
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Expr e = random_expr(rng, 3, vars);
        const Expr dx = differentiate(e, "x");
        for (int pt = 0; pt < 3; ++pt) {
            double v[2] = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
            const double h = 1e-6 * std::max(1.0, std::fabs(v[0]));
            const double x0 = v[0];
            v[0] = x0 + h;
            const double fp = e.eval(v);
            v[0] = x0 - h;
            const double fm = e.eval(v);
            v[0] = x0;
            const double fd = (fp - fm) / (2.0 * h);
            const double an = dx.eval(v);
            CHECK(std::fabs(an - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)));
            ++checked;
        }
    }
    CHECK(checked == 300);
}

TEST_CASE("printing is idempotent") {
    Rng rng(99);
    const std::vector<std::string> vars = {"x", "y"};
    for (int trial = 0; trial < 200; ++trial) {
        const Expr e = random_expr(rng, 3, vars);
        const std::string s1 = e.str();
        const Expr r = parse(s1, vars);
        CHECK(r.str() == s1);
        // And the reparse is evaluation-equivalent.
        double v[2] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        CHECK(e.eval(v) == doctest::Approx(r.eval(v)).epsilon(1e-15));
    }

    // Derivatives introduce negative constants and shared subtrees; their printed form
    // must survive a round trip too.
    for (const char* text : {"x^3", "x^0.5", "(x-2)*(y+1)", "sqrt(1.5+cos(x))", "x/y",
                             "abs(x)*y", "tan(0.3*x)", "-(x*y)", "x^-2"}) {
        const Expr e = parse(text, vars);
        const std::string printed = e.str();
        CHECK(parse(printed, vars).str() == printed);
        const Expr d = differentiate(e, "x");
        const std::string dp = d.str();
        CHECK(parse(dp, vars).str() == dp);
    }
}
