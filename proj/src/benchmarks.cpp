#include "regrisk/benchmarks.hpp"

#include "regrisk/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdio>

namespace regrisk {

namespace {

// Binomial bracket: a'^2 (3M - 9) + a' (-11M + 29) + 10M - 22, a' = (1 - alpha)/2,
// split as M * slope + intercept.
double bracket_slope(double alpha) {
    const double a = (1 - alpha) / 2;
    return 3 * a * a - 11 * a + 10;
}

double bracket_intercept(double alpha) {
    const double a = (1 - alpha) / 2;
    return -9 * a * a + 29 * a - 22;
}

// Larger root n of B n^2 - main n - q = 0.
std::optional<std::pair<double, double>> solve_quadratic_n(double B, double main, double q) {
    const double disc = main * main + 4 * B * q;
    if (disc < 0 || B <= 0) return std::nullopt;
    const double s = std::sqrt(disc);
    return std::make_pair((main + s) / (2 * B), (main - s) / (2 * B));
}

IdeResult ide_from_M(double M) {
    IdeResult r;
    r.M = M;
    if (!(M >= 4) || !std::isfinite(M)) return r;
    const double s = std::sqrt(std::max(0.0, 1 - 4 / M));
    r.m = (1 + s) / 2;
    r.m_other = (1 - s) / 2;
    return r;
}

}  // namespace

double binomial_M(double m) {
    if (!(m > 0 && m < 1)) throw ConfigError("binomial probability must be in (0, 1)");
    return 1 / m + 1 / (1 - m);
}

double binomial_risk_M(double M, double alpha, double n) {
    return 1 / (2 * n) + (M * bracket_slope(alpha) + bracket_intercept(alpha)) / (24 * n * n);
}

double binomial_risk(double m, double alpha, double n) { return binomial_risk_M(binomial_M(m), alpha, n); }

std::string IdeResult::render(int digits) const {
    if (!m) return "*";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *m);
    return buf;
}

IdeResult ide(const RiskExpansion& r, double alpha) {
    // With n = (p+2)k both main terms equal 1/(2k); equating the n^-2 terms:
    // (M slope + intercept)/24 = q / (p+2)^2.
    const double p2 = r.p + 2.0;
    const double slope = bracket_slope(alpha);
    if (slope == 0) return {};
    const double M = (24 * r.q(alpha) / (p2 * p2) - bracket_intercept(alpha)) / slope;
    return ide_from_M(M);
}

IdeResult ide_at_k(const RiskExpansion& r, double alpha, double k) {
    const double n = (r.p + 2.0) * k;
    const double target = r.main / n + r.q(alpha) / (n * n);
    auto f = [&](double M) { return binomial_risk_M(M, alpha, k) - target; };
    // Linear in M; bracket generously and let a bracketing solver find it.
    double lo = -1e6, hi = 1e6;
    if (f(lo) * f(hi) > 0) return {};
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return ide_from_M((a + b) / 2);
}

std::optional<double> rss_at_k(const RiskExpansion& r, double alpha, int k) {
    const double B = binomial_risk_M(4.0, alpha, k);
    auto roots = solve_quadratic_n(B, r.main, r.q(alpha));
    if (!roots) return std::nullopt;
    return roots->first;
}

RssResult rss(const RiskExpansion& r, double alpha, int k_start, int k_step, int k_max) {
    if (k_start < 1 || k_step < 1) throw ConfigError("benchmark k and its step must be positive");
    for (int k = k_start; k <= k_max; k += k_step) {
        const double B = binomial_risk_M(4.0, alpha, k);
        auto roots = solve_quadratic_n(B, r.main, r.q(alpha));
        if (!roots) continue;
        if (roots->first >= static_cast<double>(r.validity_n_min)) {
            RssResult out;
            out.k = k;
            out.n_exact = roots->first;
            out.n_other_root = roots->second;
            out.n = round_half_away(roots->first);
            return out;
        }
    }
    throw NumericError("no solution at any k <= " + std::to_string(k_max));
}

CoinResult coin_equivalent(const RiskExpansion& r, double alpha, long n_actual) {
    if (n_actual < r.p + 3) throw ConfigError("n_actual must be at least p + 3");
    const double target = evaluate_risk(r, alpha, n_actual).value;
    // 1/(2n) + c/n^2 = target  ->  target n^2 - n/2 - c = 0
    const double c = (4.0 * bracket_slope(alpha) + bracket_intercept(alpha)) / 24;
    auto roots = solve_quadratic_n(target, 0.5, c);
    if (!roots) throw NumericError("no coin-toss sample size matches this risk");
    return {round_half_away(roots->first), roots->first};
}

long round_half_away(double x) { return static_cast<long>(std::round(x)); }

}  // namespace regrisk
