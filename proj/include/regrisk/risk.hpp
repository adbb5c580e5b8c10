#pragma once

#include "regrisk/eta.hpp"
#include "regrisk/moments.hpp"
#include "regrisk/rational.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace regrisk {

// Table entries as a scalar type S (double, or Rational for exact tables).
template <class S>
class EtaValues {
public:
    explicit EtaValues(const EtaTable& table);
    S operator()(int i, int j, int k, int l) const;
    // Used by the error propagation: overrides one entry.
    void perturb(const EtaIndex& x, double delta);

private:
    const EtaTable* table_;
    std::array<std::optional<S>, EtaTable::kSize> values_{};
};

template <class S>
struct MetricBlock {
    S eta0020{}, delta{}, tg00{}, tg0s{}, tgss{};
};

template <class S>
MetricBlock<S> metric_block(const EtaValues<S>& eta);
MetricBlock<double> metric_block(const EtaTable& table);

// Slot alphabet of the combinator patterns: B is a regression-coefficient
// index, S the scale index.
enum class Slot { B, S };

struct EtaTerm {
    int coef;
    EtaIndex index;
};

// constant + sum coef * eta[index]
struct EtaFormula {
    int constant = 0;
    std::vector<EtaTerm> terms;
};

// Patterns: "(xy)z", "xyz", "(xy)(zw)", "(xyz)w", "(xy)zw", "xyzw" with each
// slot B or S, e.g. "(BS)B" or "(SS)(SS)". Throws ConfigError otherwise.
EtaFormula eta_pattern_formula(const std::string& pattern);

template <class S>
S evaluate(const EtaFormula& f, const EtaValues<S>& eta);

template <class S>
S eta_pattern(const EtaValues<S>& eta, const std::string& pattern);
double eta_pattern(const EtaTable& table, const std::string& pattern);

// Every table entry the risk pipeline reads.
std::vector<EtaIndex> referenced_eta_indices();

template <class S>
struct LTerms {
    S l11{}, l12{}, l13{}, l14{}, l15{};
    S l21{}, l22{}, l23{}, l24{}, l25{}, l26{};
};

template <class S>
LTerms<S> l_terms(const EtaValues<S>& eta, const AggregatedMoments<S>& m, int p);

template <class S>
struct GeometricInvariants {
    S ffe{}, tt1{}, tt2{}, rre{}, aaee1{}, aaee2{}, aaem1{}, aaem2{};
};

// `dim` is the dimension symbol entering aaee1, aaee2 and the bracket; the
// published coefficient tables use the regressor count p.
template <class S>
GeometricInvariants<S> geometric_invariants(const LTerms<S>& l, const S& dim);

// ED(alpha, n) ~ main / n + (qa alpha^2 + qb alpha + qc) / n^2
template <class S>
struct RiskExpansionT {
    int p = 1;
    S main{}, qa{}, qb{}, qc{};
    long validity_n_min = 0;

    S q(const S& alpha) const { return qa * alpha * alpha + qb * alpha + qc; }
};

using RiskExpansion = RiskExpansionT<double>;

template <class S>
RiskExpansionT<S> risk_expansion(const GeometricInvariants<S>& g, int p, const S& dim);
template <class S>
RiskExpansionT<S> risk_expansion(const GeometricInvariants<S>& g, int p) {
    return risk_expansion(g, p, S(p));
}

RiskExpansion to_double(const RiskExpansionT<Rational>& r);

// Smallest n >= p + 3 at which main/n + q/n^2 is positive and decreasing.
long validity_n_min(double main, double q, int p);

struct RiskValue {
    double value = 0.0;
    bool below_validity = false;  // n < validity_n_min
};

RiskValue evaluate_risk(const RiskExpansion& r, double alpha, long n);

// Whole pipeline. Exact when the table is exact and the moments are rational.
struct RiskReport {
    RiskExpansion expansion;
    std::optional<RiskExpansionT<Rational>> exact;
    // Same pipeline with the full parameter count p + 2 as dimension symbol.
    RiskExpansion full_dimension_variant;
    // First-order propagation of the table's error bounds to (qa, qb, qc).
    std::array<double, 3> coeff_error{};
};

template <class S>
RiskExpansionT<S> assemble_risk(const EtaValues<S>& eta, const AggregatedMoments<S>& m, int p,
                                std::optional<S> dim = std::nullopt);

RiskReport compute_risk(const EtaTable& table, const MomentSummary<Rational>& moments);
RiskReport compute_risk(const EtaTable& table, const MomentSummary<double>& moments);

}  // namespace regrisk
