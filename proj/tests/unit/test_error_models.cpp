#include "regrisk/error.hpp"
#include "regrisk/error_model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace regrisk;

#ifndef REGRISK_FIXTURES
#define REGRISK_FIXTURES "tests/fixtures"
#endif

TEST_CASE("normal log-derivatives") {
    const auto m = ErrorModel::normal();
    CHECK(m.d1(2.0) == -2.0);
    CHECK(m.d2(0.3) == -1.0);
    CHECK(m.d3(1.7) == 0.0);
    CHECK(m.pdf(0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("student t") {
    const auto m = ErrorModel::student_t(Rational(3));
    CHECK(m.d2(0) == doctest::Approx(-4.0 / 3).epsilon(1e-15));
    CHECK(m.d1(1.5) == doctest::Approx(-4 * 1.5 / (3 + 2.25)).epsilon(1e-15));
    // c(3) = Gamma(2) / (sqrt(3 pi) Gamma(3/2))
    CHECK(m.pdf(0) == doctest::Approx(1 / (std::sqrt(3 * std::numbers::pi) * std::sqrt(std::numbers::pi) / 2)));
    CHECK(m.pdf(0) == doctest::Approx(0.36755).epsilon(1e-5));
    CHECK(total_mass(m) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.exact_nu() == Rational(3));
    CHECK_THROWS_AS(ErrorModel::student_t(Rational(0)), ConfigError);
    CHECK_THROWS_AS(ErrorModel::student_t(-1.0), ConfigError);
}

TEST_CASE("skew normal") {
    const auto m = ErrorModel::skew_normal(3);
    CHECK(m.pdf(0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));
    CHECK(total_mass(m) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_FALSE(m.symmetric());
    // Far left tail: Phi(3y) underflows, derivatives stay finite.
    for (double y : {-20.0, -50.0, -300.0}) {
        CHECK(std::isfinite(m.d1(y)));
        CHECK(std::isfinite(m.d2(y)));
        CHECK(std::isfinite(m.d3(y)));
    }
    // Asymptotically log f ~ -(1+b^2) y^2 / 2, so d2 -> -(1+b^2).
    CHECK(m.d2(-300) == doctest::Approx(-10).epsilon(1e-4));
}

TEST_CASE("skew normal with b = 0 is the normal") {
    const auto s = ErrorModel::skew_normal(0);
    const auto n = ErrorModel::normal();
    for (double y = -6; y <= 6; y += 0.37) {
        CHECK(std::abs(s.pdf(y) - n.pdf(y)) < 1e-12);
        for (int r = 1; r <= 3; ++r) CHECK(std::abs(s.log_deriv(r, y) - n.log_deriv(r, y)) < 1e-12);
    }
}

TEST_CASE("finite-difference agreement for every family") {
    for (const auto& m : {ErrorModel::normal(), ErrorModel::student_t(Rational(3)),
                          ErrorModel::student_t(Rational(21, 5)), ErrorModel::skew_normal(3),
                          ErrorModel::skew_normal(-1.5)}) {
        const auto checks = finite_difference_check(m);
        CHECK(checks.size() == 150);
        for (const auto& c : checks) {
            INFO(m.describe(), " order ", c.order, " y=", c.y, " ", c.analytic, " vs ", c.numeric);
            CHECK(c.ok);
        }
    }
}

TEST_CASE("symmetry of the symmetric families") {
    for (const auto& m : {ErrorModel::normal(), ErrorModel::student_t(Rational(3))}) {
        for (double y : {0.3, 1.0, 2.7, 5.0}) {
            CHECK(m.d1(-y) == doctest::Approx(-m.d1(y)));
            CHECK(m.d2(-y) == doctest::Approx(m.d2(y)));
            CHECK(m.d3(-y) == doctest::Approx(-m.d3(y)));
        }
    }
}

TEST_CASE("model spec parsing") {
    CHECK(parse_error_model("normal").kind() == ErrorKind::Normal);
    CHECK(parse_error_model("t:4.2").exact_nu() == Rational(21, 5));
    CHECK(parse_error_model("skew-normal:3").skewness_param() == 3.0);
    CHECK_THROWS_AS(parse_error_model("cauchy"), ConfigError);
    CHECK_THROWS_AS(parse_error_model("t:"), ConfigError);
    CHECK_THROWS_AS(parse_error_model("skew-normal:x"), ConfigError);
}

TEST_CASE("custom models from files") {
    const auto m = ErrorModel::custom_from_file(REGRISK_FIXTURES "/logistic.model");
    CHECK(m.kind() == ErrorKind::Custom);
    CHECK(m.pdf(0) == doctest::Approx(0.25));
    CHECK(m.d2(0) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(m.log_deriv(4, 0.0), ConfigError);

    try {
        ErrorModel::custom_from_file(REGRISK_FIXTURES "/bad_syntax.model");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(ErrorModel::custom_from_file(REGRISK_FIXTURES "/wrong_derivative.model"), ConfigError);
    CHECK_THROWS_AS(ErrorModel::custom_from_file(REGRISK_FIXTURES "/does_not_exist.model"), ConfigError);
}

TEST_CASE("custom model validation") {
    // Unnormalized density.
    CHECK_THROWS_AS(ErrorModel::custom_from_text("logf = -y^2/2\nd1 = -y\nd2 = -1\nd3 = 0\n"), ConfigError);
    // Missing derivative.
    CHECK_THROWS_AS(ErrorModel::custom_from_text("logf = -y^2/2 - 0.5*log(2*pi)\nd1 = -y\nd2 = -1\n"),
                    ConfigError);
    // Half-line support (log of a negative argument is not finite).
    CHECK_THROWS_AS(ErrorModel::custom_from_text("logf = log(y) - y\nd1 = 1/y - 1\nd2 = -1/y^2\nd3 = 2/y^3\n"),
                    ConfigError);
    // A normal written by hand matches the built-in one.
    const auto c = ErrorModel::custom_from_text("logf = -y^2/2 - 0.5*log(2*pi)\nd1 = -y\nd2 = -1\nd3 = 0\n");
    CHECK(c.pdf(1.3) == doctest::Approx(ErrorModel::normal().pdf(1.3)).epsilon(1e-14));
}

TEST_CASE("non-finite derivatives are reported with the offending y") {
    CustomDensity d;
    d.log_pdf = [](double y) { return -y * y / 2 - 0.5 * std::log(2 * std::numbers::pi); };
    d.d1 = [](double y) { return -y; };
    d.d2 = [](double) { return -1.0; };
    d.d3 = [](double y) { return y > 100 ? std::nan("") : 0.0; };
    const auto m = ErrorModel::custom(d);
    try {
        m.d3(200);
        FAIL("expected a numeric error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("y=200") != std::string::npos);
    }
}

TEST_CASE("sampling matches the first two moments") {
    std::mt19937_64 rng(7);
    const auto m = ErrorModel::skew_normal(3);
    const double delta = 3 / std::sqrt(10.0);
    const double mean = delta * std::sqrt(2 / std::numbers::pi);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double y = sample_error(m, rng);
        s += y;
        s2 += y * y;
    }
    CHECK(s / n == doctest::Approx(mean).epsilon(0.01));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK_THROWS_AS(sample_error(ErrorModel::custom_from_file(REGRISK_FIXTURES "/logistic.model"), rng), ConfigError);
}
