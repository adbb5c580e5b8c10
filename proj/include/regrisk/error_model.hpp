#pragma once

#include "regrisk/rational.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace regrisk {

enum class ErrorKind { Normal, StudentT, SkewNormal, Custom };

struct CustomDensity {
    std::function<double(double)> log_pdf;
    std::function<double(double)> d1, d2, d3;
    std::string name = "custom";
};

// Error-term density f on the whole real line together with the first three
// derivatives of log f. Immutable; cheap to copy.
class ErrorModel {
public:
    static ErrorModel normal();
    static ErrorModel student_t(const Rational& nu);
    static ErrorModel student_t(double nu);
    static ErrorModel skew_normal(double b);
    // Validates the supplied derivatives by finite differences and checks
    // normalization and whole-line support; throws ConfigError on failure.
    static ErrorModel custom(CustomDensity density);
    // File format: lines "logf = <expr>", "d1 = <expr>", "d2 = <expr>",
    // "d3 = <expr>"; '#' starts a comment. See Expression for the grammar.
    static ErrorModel custom_from_file(const std::string& path);
    static ErrorModel custom_from_text(const std::string& text, const std::string& name = "custom");

    ErrorKind kind() const { return kind_; }
    double nu() const { return param_; }
    double skewness_param() const { return param_; }
    // Exact nu for StudentT when it was given as a rational.
    const std::optional<Rational>& exact_nu() const { return exact_nu_; }
    std::string describe() const;

    double pdf(double y) const;
    double log_pdf(double y) const;
    // order in {1,2,3}; throws NumericError on a non-finite result.
    double log_deriv(int order, double y) const;
    double d1(double y) const { return log_deriv(1, y); }
    double d2(double y) const { return log_deriv(2, y); }
    double d3(double y) const { return log_deriv(3, y); }

    bool symmetric() const { return kind_ == ErrorKind::Normal || kind_ == ErrorKind::StudentT; }

private:
    ErrorModel() = default;
    double raw_deriv(int order, double y) const;

    ErrorKind kind_ = ErrorKind::Normal;
    double param_ = 0.0;
    double log_c_ = 0.0;
    std::optional<Rational> exact_nu_;
    std::shared_ptr<const CustomDensity> custom_;
};

struct DerivativeCheck {
    int order = 0;
    double y = 0.0;
    double analytic = 0.0;
    double numeric = 0.0;
    bool ok = true;
};

// Central finite-difference check of log_deriv against log_pdf (orders 1..3)
// at `points` equally spaced points in [lo, hi].
std::vector<DerivativeCheck> finite_difference_check(const ErrorModel& model, int points = 50,
                                                     double lo = -6.0, double hi = 6.0,
                                                     double step = 1e-5, double rel_tol = 1e-5);

// Integral of the density over the real line.
double total_mass(const ErrorModel& model);

// Parses "normal", "t:<nu>", "skew-normal:<b>", "custom:<file>".
ErrorModel parse_error_model(const std::string& spec);

}  // namespace regrisk

#include <random>

namespace regrisk {

// One draw from the error density. Supported for the closed-form families;
// throws ConfigError for Custom.
double sample_error(const ErrorModel& model, std::mt19937_64& rng);

}  // namespace regrisk
