#include "regrisk/error_model.hpp"

#include "regrisk/error.hpp"
#include "regrisk/expression.hpp"
#include "regrisk/quadrature.hpp"
#include "regrisk/special_functions.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace regrisk {

namespace {

double t_log_normalizer(double nu) {
    return std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * std::numbers::pi);
}

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

ErrorModel ErrorModel::normal() {
    ErrorModel m;
    m.kind_ = ErrorKind::Normal;
    m.log_c_ = -0.5 * std::log(2 * std::numbers::pi);
    return m;
}

ErrorModel ErrorModel::student_t(const Rational& nu) {
    if (nu <= 0) throw ConfigError("t degrees of freedom must be positive");
    ErrorModel m = student_t(to_double(nu));
    m.exact_nu_ = nu;
    return m;
}

ErrorModel ErrorModel::student_t(double nu) {
    if (!(nu > 0) || !std::isfinite(nu)) throw ConfigError("t degrees of freedom must be positive");
    ErrorModel m;
    m.kind_ = ErrorKind::StudentT;
    m.param_ = nu;
    m.log_c_ = t_log_normalizer(nu);
    m.exact_nu_ = Rational(nu);  // exact binary value of the double
    return m;
}

ErrorModel ErrorModel::skew_normal(double b) {
    if (!std::isfinite(b)) throw ConfigError("skew-normal shape must be finite");
    ErrorModel m;
    m.kind_ = ErrorKind::SkewNormal;
    m.param_ = b;
    m.log_c_ = std::log(2.0) - 0.5 * std::log(2 * std::numbers::pi);
    return m;
}

ErrorModel ErrorModel::custom(CustomDensity density) {
    if (!density.log_pdf || !density.d1 || !density.d2 || !density.d3)
        throw ConfigError("custom density needs log f and all three derivatives");
    ErrorModel m;
    m.kind_ = ErrorKind::Custom;
    m.custom_ = std::make_shared<const CustomDensity>(std::move(density));

    for (int i = -400; i <= 400; ++i) {
        const double y = i * 0.05;
        const double lp = m.custom_->log_pdf(y);
        if (std::isnan(lp) || lp == -HUGE_VAL)
            throw ConfigError("custom density is not positive on the whole real line (fails at y=" +
                              format_number(y) + "); restricted support is not supported");
    }
    const double mass = total_mass(m);
    if (std::abs(mass - 1.0) > 1e-10)
        throw ConfigError("custom density integrates to " + format_number(mass) + ", not 1");
    for (const auto& c : finite_difference_check(m)) {
        if (!c.ok)
            throw ConfigError("custom log-derivative of order " + std::to_string(c.order) +
                              " disagrees with finite differences at y=" + format_number(c.y) +
                              " (supplied " + format_number(c.analytic) + ", numeric " +
                              format_number(c.numeric) + ")");
    }
    return m;
}

ErrorModel ErrorModel::custom_from_text(const std::string& text, const std::string& name) {
    std::map<std::string, Expression> exprs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected '<name> = <expression>'", lineno,
                             static_cast<int>(line.find_first_not_of(" \t")) + 1);
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key != "logf" && key != "d1" && key != "d2" && key != "d3")
            throw ParseError("unknown definition '" + key + "' (expected logf, d1, d2 or d3)", lineno,
                             static_cast<int>(line.find(key)) + 1);
        if (exprs.count(key))
            throw ParseError("duplicate definition of " + key, lineno, 1);
        exprs.emplace(key, Expression::parse(line.substr(eq + 1), lineno, static_cast<int>(eq) + 1));
    }
    for (const char* k : {"logf", "d1", "d2", "d3"})
        if (!exprs.count(k)) throw ParseError(std::string("missing definition of ") + k, lineno + 1, 1);

    CustomDensity d;
    d.log_pdf = exprs.at("logf");
    d.d1 = exprs.at("d1");
    d.d2 = exprs.at("d2");
    d.d3 = exprs.at("d3");
    d.name = name;
    return custom(std::move(d));
}

ErrorModel ErrorModel::custom_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read custom model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return custom_from_text(ss.str(), "custom:" + path);
}

std::string ErrorModel::describe() const {
    switch (kind_) {
    case ErrorKind::Normal: return "normal";
    case ErrorKind::StudentT:
        return "t:" + (exact_nu_ && boost::multiprecision::denominator(*exact_nu_) < 1000000
                           ? to_string(*exact_nu_)
                           : format_number(param_));
    case ErrorKind::SkewNormal: return "skew-normal:" + format_number(param_);
    case ErrorKind::Custom: return custom_->name;
    }
    return "?";
}

double ErrorModel::log_pdf(double y) const {
    switch (kind_) {
    case ErrorKind::Normal: return log_c_ - 0.5 * y * y;
    case ErrorKind::StudentT: return log_c_ - 0.5 * (param_ + 1) * std::log1p(y * y / param_);
    case ErrorKind::SkewNormal: return log_c_ - 0.5 * y * y + log_normal_cdf(param_ * y);
    case ErrorKind::Custom: return custom_->log_pdf(y);
    }
    return 0.0;
}

double ErrorModel::pdf(double y) const { return std::exp(log_pdf(y)); }

double ErrorModel::raw_deriv(int order, double y) const {
    switch (kind_) {
    case ErrorKind::Normal: return order == 1 ? -y : order == 2 ? -1.0 : 0.0;
    case ErrorKind::StudentT: {
        const double nu = param_;
        const double w = nu + y * y;
        if (order == 1) return -(nu + 1) * y / w;
        if (order == 2) return (nu + 1) * (y * y - nu) / (w * w);
        return 2 * (nu + 1) * y * (3 * nu - y * y) / (w * w * w);
    }
    case ErrorKind::SkewNormal: {
        const double b = param_;
        const double r = normal_hazard_left(b * y);
        if (order == 1) return -y + b * r;
        if (order == 2) return -1 - b * b * r * r - b * b * b * y * r;
        return b * b * b * (2 * r * r * r + 3 * b * y * r * r + (b * b * y * y - 1) * r);
    }
    case ErrorKind::Custom:
        return order == 1 ? custom_->d1(y) : order == 2 ? custom_->d2(y) : custom_->d3(y);
    }
    return 0.0;
}

double ErrorModel::log_deriv(int order, double y) const {
    if (order < 1 || order > 3) throw ConfigError("log-derivative order must be 1, 2 or 3");
    const double v = raw_deriv(order, y);
    if (!std::isfinite(v))
        throw NumericError("density evaluation failure at y=" + format_number(y) + " (order " +
                           std::to_string(order) + ")");
    return v;
}

std::vector<DerivativeCheck> finite_difference_check(const ErrorModel& model, int points, double lo,
                                                     double hi, double step, double rel_tol) {
    // Order r is compared with the central difference of order r-1 (log f for
    // r = 1); differencing log f three times at h = 1e-5 is pure rounding noise.
    std::vector<DerivativeCheck> out;
    for (int i = 0; i < points; ++i) {
        const double y = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
        for (int order = 1; order <= 3; ++order) {
            auto lower = [&](double t) {
                return order == 1 ? model.log_pdf(t) : model.log_deriv(order - 1, t);
            };
            DerivativeCheck c;
            c.order = order;
            c.y = y;
            c.analytic = model.log_deriv(order, y);
            c.numeric = (lower(y + step) - lower(y - step)) / (2 * step);
            c.ok = std::abs(c.analytic - c.numeric) <= rel_tol * std::max(1.0, std::abs(c.analytic));
            out.push_back(c);
        }
    }
    return out;
}

double total_mass(const ErrorModel& model) {
    auto r = integrate_real_line([&](double y) { return model.pdf(y); }, 1e-12);
    return r.value;
}

ErrorModel parse_error_model(const std::string& spec) {
    if (spec == "normal") return ErrorModel::normal();
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("unknown error model '" + spec + "'");
    const std::string head = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (head == "t") return ErrorModel::student_t(parse_rational(arg));
    if (head == "skew-normal") return ErrorModel::skew_normal(to_double(parse_rational(arg)));
    if (head == "custom") return ErrorModel::custom_from_file(arg);
    throw ConfigError("unknown error model '" + spec + "'");
}

}  // namespace regrisk

namespace regrisk {

double sample_error(const ErrorModel& model, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    switch (model.kind()) {
    case ErrorKind::Normal: return z(rng);
    case ErrorKind::StudentT: {
        std::student_t_distribution<double> t(model.nu());
        return t(rng);
    }
    case ErrorKind::SkewNormal: {
        const double b = model.skewness_param();
        const double delta = b / std::sqrt(1 + b * b);
        const double u0 = z(rng);
        const double u1 = z(rng);
        return delta * std::abs(u0) + std::sqrt(1 - delta * delta) * u1;
    }
    case ErrorKind::Custom: break;
    }
    throw ConfigError("sampling is not supported for custom error models");
}

}  // namespace regrisk
