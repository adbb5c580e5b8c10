#include "regrisk/moments.hpp"

#include "regrisk/error.hpp"

#include <cmath>

namespace regrisk {

template <class S>
void validate(const MomentSummary<S>& m) {
    if (m.p < 1) throw ConfigError("p must be a positive integer");
    if (const auto* h = std::get_if<HomogeneousMoments<S>>(&m.form)) {
        if (h->m4 < 1) throw ConfigError("m4 must be at least 1 for standardized regressors");
        if (h->m22 < 0) throw ConfigError("m22 must be nonnegative");
    } else {
        const auto& a = std::get<AggregatedMoments<S>>(m.form);
        if (a.M2a < 0 || a.M2b < 0 || a.M1 < 0)
            throw ConfigError("aggregated moments M2a, M2b, M1 must be nonnegative");
    }
}

template void validate(const MomentSummary<double>&);
template void validate(const MomentSummary<Rational>&);

MomentSummary<double> to_double(const MomentSummary<Rational>& m) {
    MomentSummary<double> out;
    out.p = m.p;
    if (const auto* h = std::get_if<HomogeneousMoments<Rational>>(&m.form)) {
        out.form = HomogeneousMoments<double>{to_double(h->m4), to_double(h->m22), to_double(h->m3),
                                              to_double(h->m21), to_double(h->m111)};
    } else {
        const auto& a = std::get<AggregatedMoments<Rational>>(m.form);
        out.form = AggregatedMoments<double>{to_double(a.M2a), to_double(a.M2b), to_double(a.M1)};
    }
    return out;
}

std::string XDistribution::describe() const {
    switch (kind) {
    case XPreset::Normal: return "normal";
    case XPreset::StudentT: return "t:" + to_string(param);
    case XPreset::Controlled: return "controlled";
    case XPreset::Pareto: return "pareto:" + to_string(param);
    }
    return "?";
}

XDistribution parse_x_distribution(const std::string& spec, int p) {
    if (p < 1) throw ConfigError("p must be a positive integer");
    XDistribution x;
    x.p = p;
    if (spec == "normal") {
        x.kind = XPreset::Normal;
    } else if (spec == "controlled") {
        x.kind = XPreset::Controlled;
    } else if (spec.rfind("t:", 0) == 0) {
        x.kind = XPreset::StudentT;
        x.param = parse_rational(spec.substr(2));
        if (x.param <= 4) throw ConfigError("t regressors need nu > 4 for finite fourth moments");
    } else if (spec.rfind("pareto:", 0) == 0) {
        x.kind = XPreset::Pareto;
        x.param = parse_rational(spec.substr(7));
        if (x.param <= 4) throw ConfigError("Pareto regressors need shape b > 4 for finite fourth moments");
    } else {
        throw ConfigError("unknown x distribution '" + spec + "' (normal, t:<nu>, controlled, pareto:<b>)");
    }
    return x;
}

namespace {

Rational pareto_m4(const Rational& b) {
    return 3 + 6 * (b * b * b + b * b - 6 * b - 2) / (b * (b - 3) * (b - 4));
}

Rational pareto_m3_squared(const Rational& b) {
    return 4 * (1 + b) * (1 + b) * (b - 2) / ((b - 3) * (b - 3) * b);
}

}  // namespace

HomogeneousMoments<double> preset_homogeneous(const XDistribution& x) {
    switch (x.kind) {
    case XPreset::Normal: return {3.0, 1.0, 0.0, 0.0, 0.0};
    case XPreset::Controlled: return {1.0, 1.0, 0.0, 0.0, 0.0};
    case XPreset::StudentT: {
        const Rational r = (x.param - 2) / (x.param - 4);
        return {to_double(3 * r), to_double(r), 0.0, 0.0, 0.0};
    }
    case XPreset::Pareto:
        return {to_double(pareto_m4(x.param)), 1.0, std::sqrt(to_double(pareto_m3_squared(x.param))), 0.0, 0.0};
    }
    return {};
}

AggregatedMoments<Rational> preset_aggregates(const XDistribution& x) {
    const Rational p = x.p;
    Rational m4, m22 = 1, m3sq = 0;
    switch (x.kind) {
    case XPreset::Normal: m4 = 3; break;
    case XPreset::Controlled: m4 = 1; break;
    case XPreset::StudentT:
        m22 = (x.param - 2) / (x.param - 4);
        m4 = 3 * m22;
        break;
    case XPreset::Pareto:
        m4 = pareto_m4(x.param);
        m3sq = pareto_m3_squared(x.param);
        break;
    }
    return {p * m3sq, p * m3sq, p * m4 + p * (p - 1) * m22};
}

}  // namespace regrisk
