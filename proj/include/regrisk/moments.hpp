#pragma once

#include "regrisk/rational.hpp"

#include <string>
#include <variant>

namespace regrisk {

// Moments of a permutation-invariant standardized regressor vector.
template <class S>
struct HomogeneousMoments {
    S m4{}, m22{}, m3{}, m21{}, m111{};
};

template <class S>
struct AggregatedMoments {
    S M2a{}, M2b{}, M1{};
};

template <class S>
struct MomentSummary {
    int p = 1;
    std::variant<HomogeneousMoments<S>, AggregatedMoments<S>> form;
};

template <class S>
AggregatedMoments<S> to_aggregated(const MomentSummary<S>& m) {
    if (const auto* a = std::get_if<AggregatedMoments<S>>(&m.form)) return *a;
    const auto& h = std::get<HomogeneousMoments<S>>(m.form);
    const S p = S(m.p);
    AggregatedMoments<S> r;
    r.M2a = p * h.m3 * h.m3 + 3 * p * (p - 1) * h.m21 * h.m21 + p * (p - 1) * (p - 2) * h.m111 * h.m111;
    r.M2b = p * h.m3 * h.m3 + p * (p - 1) * (p - 1) * h.m21 * h.m21 + 2 * p * (p - 1) * h.m3 * h.m21;
    r.M1 = p * h.m4 + p * (p - 1) * h.m22;
    return r;
}

// Throws ConfigError when the summary violates its sign constraints.
template <class S>
void validate(const MomentSummary<S>& m);

MomentSummary<double> to_double(const MomentSummary<Rational>& m);

// The four regressor distributions used in the worked examples, all
// standardized to zero mean and identity covariance.
enum class XPreset { Normal, StudentT, Controlled, Pareto };

struct XDistribution {
    XPreset kind = XPreset::Normal;
    Rational param = 0;  // nu for StudentT, shape b for Pareto
    int p = 1;

    std::string describe() const;
};

// "normal", "t:<nu>", "controlled", "pareto:<b>".
XDistribution parse_x_distribution(const std::string& spec, int p);

// Homogeneous moments of the preset (m3 is irrational for Pareto, hence double).
HomogeneousMoments<double> preset_homogeneous(const XDistribution& x);

// Aggregated moments in exact arithmetic (only m3^2 enters).
AggregatedMoments<Rational> preset_aggregates(const XDistribution& x);

}  // namespace regrisk
