#include "regrisk/error.hpp"
#include "regrisk/expression.hpp"
#include "regrisk/parallel.hpp"
#include "regrisk/quadrature.hpp"
#include "regrisk/rational.hpp"
#include "regrisk/special_functions.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>

using namespace regrisk;

TEST_CASE("parse_rational accepts fractions, decimals and exponents") {
    CHECK(parse_rational("21/5") == Rational(21, 5));
    CHECK(parse_rational("4.2") == Rational(21, 5));
    CHECK(parse_rational("-0.25") == Rational(-1, 4));
    CHECK(parse_rational("1e-3") == Rational(1, 1000));
    CHECK(parse_rational("2.5E2") == Rational(250));
    CHECK(to_string(Rational(-217, 12)) == "-217/12");
    CHECK_THROWS_AS(parse_rational("abc"), ConfigError);
    CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
    CHECK_THROWS_AS(parse_rational(""), ConfigError);
}

TEST_CASE("expression grammar") {
    CHECK(Expression::parse("1 + 2*3")(0) == doctest::Approx(7));
    CHECK(Expression::parse("2^3^2")(0) == doctest::Approx(512));  // right associative
    CHECK(Expression::parse("-y^2")(3) == doctest::Approx(-9));
    CHECK(Expression::parse("exp(log(y))")(2.5) == doctest::Approx(2.5));
    CHECK(Expression::parse("Phi(0) + phi(0)*sqrt(2*pi)")(0) == doctest::Approx(1.5));
    CHECK(Expression::parse("erf(0)")(0) == 0.0);

    try {
        Expression::parse("1 + * 2", 4);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
        CHECK(e.column() == 5);
    }
    CHECK_THROWS_AS(Expression::parse("sin(y)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("(y"), ParseError);
    CHECK_THROWS_AS(Expression::parse("y y"), ParseError);
}

TEST_CASE("normal special functions") {
    CHECK(normal_pdf(0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi)));
    CHECK(normal_cdf(0) == doctest::Approx(0.5));
    CHECK(normal_cdf(-37) > 0);  // erfc keeps the far tail
    // log Phi(-x) ~ -x^2/2 - log(x sqrt(2 pi)) - 1/x^2
    const double x = 50;
    CHECK(log_normal_cdf(-x) ==
          doctest::Approx(-x * x / 2 - std::log(x * std::sqrt(2 * std::numbers::pi)) - 1 / (x * x)).epsilon(1e-9));
    // The hazard is continuous across the switch to the asymptotic series.
    const double a = normal_hazard_left(-35.0 + 1e-9), b = normal_hazard_left(-35.0 - 1e-9);
    CHECK(std::abs(a - b) / a < 1e-9);
    CHECK(normal_hazard_left(-100) == doctest::Approx(100.0099980).epsilon(1e-8));
    CHECK(normal_hazard_left(0) == doctest::Approx(2 * normal_pdf(0)));
}

TEST_CASE("real-line quadrature") {
    const auto r = integrate_real_line([](double x) { return std::exp(-x * x); }, 1e-12);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    const auto m = integrate_real_line([](double x) { return x * x * normal_pdf(x); }, 1e-12);
    CHECK(m.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw NumericError("boom");
                    }),
                    NumericError);
    CHECK(resolve_threads(3) == 3);
}
