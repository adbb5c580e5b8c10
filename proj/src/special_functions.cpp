#include "regrisk/special_functions.hpp"

#include <cmath>
#include <numbers>

namespace regrisk {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr double kAsymptoticSwitch = -35.0;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
    if (x > kAsymptoticSwitch)
        return std::log(normal_cdf(x));
    // Phi(x) = phi(x) / hazard(x)
    return std::log(kInvSqrt2Pi) - 0.5 * x * x - std::log(normal_hazard_left(x));
}

double normal_hazard_left(double x) {
    if (x > kAsymptoticSwitch)
        return normal_pdf(x) / normal_cdf(x);
    // Mills ratio series for Phi(x)/phi(x) = (1/|x|)(1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8)
    const double u = 1.0 / (x * x);
    const double series = 1.0 - u * (1.0 - 3.0 * u * (1.0 - 5.0 * u * (1.0 - 7.0 * u)));
    return -x / series;
}

}  // namespace regrisk
