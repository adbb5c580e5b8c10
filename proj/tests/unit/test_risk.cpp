#include "regrisk/error.hpp"
#include "regrisk/risk.hpp"

#include <doctest.h>

#include <cmath>

using namespace regrisk;

namespace {

RiskExpansionT<Rational> exact_expansion(const EtaTable& t, const MomentSummary<Rational>& m) {
    return assemble_risk(EtaValues<Rational>(t), to_aggregated(m), m.p);
}

MomentSummary<Rational> homogeneous(int p, Rational m4, Rational m22, Rational m3 = 0, Rational m21 = 0,
                                    Rational m111 = 0) {
    return {p, HomogeneousMoments<Rational>{m4, m22, m3, m21, m111}};
}

}  // namespace

TEST_CASE("metric block") {
    const auto n = metric_block(build_eta_table(ErrorModel::normal()));
    CHECK(n.delta == 2.0);
    CHECK(n.tg00 == 1.0);
    CHECK(n.tg0s == 0.0);
    CHECK(n.tgss == 0.5);

    const auto t3 = build_eta_table(ErrorModel::student_t(Rational(3)));
    const auto b = metric_block(t3);
    CHECK(b.tg0s == 0.0);
    const double g00 = t3(0, 0, 2, 0), g0s = -t3(0, 1, 0, 1), gss = 1 + 2 * t3(0, 0, 1, 1) + t3(0, 0, 2, 2);
    CHECK(std::abs(b.tg00 * g00 + b.tg0s * g0s - 1) < 1e-12);
    CHECK(std::abs(b.tg00 * g0s + b.tg0s * gss) < 1e-12);
    CHECK(std::abs(b.tg0s * g0s + b.tgss * gss - 1) < 1e-12);

    const auto s = metric_block(build_eta_table(ErrorModel::skew_normal(3)));
    CHECK(s.delta > 0);
    CHECK(s.tg0s != 0.0);
}

TEST_CASE("eta pattern formulas") {
    const auto t = build_eta_table(ErrorModel::normal());
    CHECK(eta_pattern(t, "(BB)B") == 0.0);
    // -(1 + 3(-1) + 3(3) + (-15)) = 8
    CHECK(eta_pattern(t, "SSS") == 8.0);
    CHECK(eta_pattern(t, "(SS)(SS)") ==
          1 + t(0, 2, 0, 4) + 4 * t(0, 0, 2, 2) + 2 * t(0, 1, 0, 2) + 4 * t(0, 0, 1, 1) + 4 * t(0, 1, 1, 3));
    // Group-internal order does not matter.
    CHECK(eta_pattern(t, "(BS)B") == eta_pattern(t, "(SB)B"));
    CHECK(eta_pattern(t, "(SS)(BB)") == eta_pattern(t, "(BB)(SS)"));
    CHECK_THROWS_AS(eta_pattern_formula("(BX)B"), ConfigError);
    CHECK_THROWS_AS(eta_pattern_formula("BBBBB"), ConfigError);
    // Written as printed: weight 3 on eta[0,0,2,1].
    const auto f = eta_pattern_formula("(SS)BS");
    int w = 0;
    for (const auto& term : f.terms)
        if (term.index == EtaIndex{0, 0, 2, 1}) w += term.coef;
    CHECK(w == 3);
}

TEST_CASE("homogeneous to aggregated") {
    const auto a = to_aggregated(homogeneous(10, 3, 1));
    CHECK(a.M2a == 0);
    CHECK(a.M2b == 0);
    CHECK(a.M1 == 120);
    const auto z = to_aggregated(homogeneous(4, 0, 0));
    CHECK(z.M1 == 0);
    // Pareto(21/5): m3^2 = 4(1+b)^2(b-2)/((b-3)^2 b)
    const Rational b(21, 5);
    const Rational m3sq = 4 * (1 + b) * (1 + b) * (b - 2) / ((b - 3) * (b - 3) * b);
    const auto pa = preset_aggregates(parse_x_distribution("pareto:4.2", 10));
    CHECK(pa.M2a == 10 * m3sq);
    CHECK(pa.M2b == 10 * m3sq);
    CHECK(pa.M1 == 10 * Rational(8129, 21) + 90);
}

TEST_CASE("homogeneous reduction against an explicit moment tensor") {
    // p = 3 tensor with the homogeneous pattern, summed over all index tuples.
    const double m4 = 2.5, m22 = 1.25, m3 = 0.75, m21 = -0.5, m111 = 0.25;
    const int p = 3;
    auto third = [&](int i, int j, int k) {
        if (i == j && j == k) return m3;
        if (i == j || j == k || i == k) return m21;
        return m111;
    };
    double M2a = 0, M2b = 0, M1 = 0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            for (int k = 0; k < p; ++k) M2a += third(i, j, k) * third(i, j, k);
    for (int k = 0; k < p; ++k) {
        double s = 0;
        for (int i = 0; i < p; ++i) s += third(i, i, k);
        M2b += s * s;
    }
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < p; ++k) M1 += i == k ? m4 : m22;
    const auto a = to_aggregated(MomentSummary<double>{p, HomogeneousMoments<double>{m4, m22, m3, m21, m111}});
    CHECK(a.M2a == doctest::Approx(M2a));
    CHECK(a.M2b == doctest::Approx(M2b));
    CHECK(a.M1 == doctest::Approx(M1));
}

TEST_CASE("moment validation") {
    CHECK_THROWS_AS(validate(homogeneous(3, Rational(1, 2), 1)), ConfigError);
    CHECK_THROWS_AS(validate(homogeneous(3, 3, -1)), ConfigError);
    CHECK_THROWS_AS(validate(MomentSummary<Rational>{3, AggregatedMoments<Rational>{-1, 0, 9}}), ConfigError);
    CHECK_THROWS_AS(validate(MomentSummary<Rational>{0, AggregatedMoments<Rational>{0, 0, 0}}), ConfigError);
    CHECK_NOTHROW(validate(homogeneous(3, 3, 1)));
}

TEST_CASE("normal error, normal regressors, p = 10") {
    const auto t = build_eta_table(ErrorModel::normal());
    const auto r = exact_expansion(t, homogeneous(10, 3, 1));
    CHECK(r.main == 6);
    CHECK(r.q(-1) == Rational(-217, 12));
    const auto d = to_double(r);
    const auto v = evaluate_risk(d, -1, 120);
    CHECK(v.value == doctest::Approx(6.0 / 120 - 217.0 / (12 * 14400)).epsilon(1e-14));
    CHECK_FALSE(v.below_validity);
    CHECK(evaluate_risk(d, -1, 5).below_validity);
    CHECK(evaluate_risk(d, 0.5, 1000000).value == doctest::Approx(6e-6 + to_double(r.q(Rational(1, 2))) * 1e-12).epsilon(1e-12));
}

TEST_CASE("alpha-prime expansion: q(1) equals the bracket at alpha' = 0 over 24") {
    // In alpha' the bracket is A a'^2 + B a' + C; q(alpha = 1) must equal C / 24, and
    // since q is quadratic in alpha, the three published specializations pin it down.
    const auto t = build_eta_table(ErrorModel::normal());
    const auto r = exact_expansion(t, homogeneous(4, 3, 1));
    const Rational q1 = r.q(1), qm1 = r.q(-1), q0 = r.q(0);
    CHECK(r.qa == (q1 + qm1) / 2 - q0);
    CHECK(r.qb == (q1 - qm1) / 2);
}

TEST_CASE("geometric invariants from zero L-terms") {
    LTerms<double> l;
    const auto g = geometric_invariants(l, 2.0);
    CHECK(g.aaee1 == -2.0);
    CHECK(g.aaee2 == -4.0);
    CHECK(g.ffe == 0.0);
    CHECK(g.tt1 == 0.0);
    LTerms<double> l2;
    l2.l23 = 1.75;
    CHECK(geometric_invariants(l2, 2.0).tt1 == 1.75);
}

TEST_CASE("proposition 1: quadratic errors ignore third moments") {
    for (const auto& m : {ErrorModel::normal(), ErrorModel::student_t(Rational(3))}) {
        const auto t = build_eta_table(m);
        const auto base = exact_expansion(t, MomentSummary<Rational>{5, AggregatedMoments<Rational>{2, 3, 40}});
        const auto big = exact_expansion(t, MomentSummary<Rational>{5, AggregatedMoments<Rational>{20, 30, 40}});
        CHECK(base.qa == big.qa);
        CHECK(base.qb == big.qb);
        CHECK(base.qc == big.qc);
    }
    // The skew normal does respond.
    const auto s = build_eta_table(ErrorModel::skew_normal(3));
    const auto a = compute_risk(s, MomentSummary<double>{5, AggregatedMoments<double>{2, 3, 40}}).expansion;
    const auto b = compute_risk(s, MomentSummary<double>{5, AggregatedMoments<double>{20, 30, 40}}).expansion;
    CHECK(std::abs(a.qc - b.qc) > 1e-3);
}

TEST_CASE("m4 coefficient sign change for the normal error") {
    // d q / d m4 is proportional to 3 alpha^2 - 8 alpha - 27.
    const auto t = build_eta_table(ErrorModel::normal());
    auto slope = [&](Rational alpha) {
        const auto lo = exact_expansion(t, homogeneous(3, 3, 1));
        const auto hi = exact_expansion(t, homogeneous(3, 4, 1));
        return hi.q(alpha) - lo.q(alpha);
    };
    CHECK(slope(-1) < 0);
    CHECK(slope(4) < 0);
    CHECK(slope(-2) > 0);
    CHECK(slope(5) > 0);
    for (int a = -6; a <= 8; ++a) {
        const Rational poly = 3 * a * a - 8 * a - 27;
        CHECK(slope(a) == Rational(3 * 3, 96) * poly);
    }
}

TEST_CASE("report carries the full-dimension diagnostic and error bounds") {
    const auto t = build_eta_table(ErrorModel::normal());
    const auto r = compute_risk(t, homogeneous(10, 3, 1));
    REQUIRE(r.exact);
    CHECK(r.exact->qc == Rational(-185, 8));
    // aaee terms with p + 2: only qc moves, by (3p^2+6p) - (3(p+2)^2 + 6(p+2)) ... kept as a diagnostic
    CHECK(r.full_dimension_variant.qa == r.expansion.qa);
    CHECK(r.full_dimension_variant.qc != r.expansion.qc);
    CHECK(r.coeff_error[0] == 0.0);

    const auto s = compute_risk(build_eta_table(ErrorModel::skew_normal(3)),
                                MomentSummary<double>{10, AggregatedMoments<double>{0, 0, 120}});
    CHECK_FALSE(s.exact);
    for (double e : s.coeff_error) {
        CHECK(e > 0);
        CHECK(e < 1e-6);
    }
}

TEST_CASE("validity threshold") {
    CHECK(validity_n_min(6, -217.0 / 12, 10) == 13);
    CHECK(validity_n_min(1.5, 100, 1) == 4);  // positive q: decreasing from the start
    auto ed = [](double n) { return 2.5 / n - 50 / (n * n); };
    const long n = validity_n_min(2.5, -50, 3);
    CHECK(ed(n) > 0);
    CHECK(ed(n) > ed(n + 1));
    CHECK_FALSE((ed(n - 1) > 0 && ed(n - 1) > ed(n)));
}

TEST_CASE("divergent entries stop the pipeline with a named index") {
    EtaTable t("broken");
    for (const auto& x : EtaTable::grid()) t.set(x, {to_double(eta_normal(x.i, x.j, x.k, x.l)), 0, EtaMethod::ClosedForm});
    t.mark_divergent({0, 0, 3, 3}, "test");
    try {
        compute_risk(t, homogeneous(3, 3, 1));
        FAIL("expected failure");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("0,0,3,3") != std::string::npos);
    }
}
