#include "regrisk/risk.hpp"

#include "regrisk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace regrisk {

// ---------------------------------------------------------------------------
// Table view

template <class S>
EtaValues<S>::EtaValues(const EtaTable& table) : table_(&table) {
    for (const auto& x : EtaTable::grid()) {
        if (!table.available(x)) continue;
        const int f = ((x.i * 3 + x.j) * 5 + x.k) * 5 + x.l;
        if constexpr (std::is_same_v<S, Rational>) values_[f] = table.exact_value(x);
        else values_[f] = table.entry(x).value;
    }
}

template <class S>
S EtaValues<S>::operator()(int i, int j, int k, int l) const {
    const EtaIndex x{i, j, k, l};
    if (!EtaTable::in_grid(x)) throw ConfigError("eta index out of range: [" + x.key() + "]");
    const auto& v = values_[((i * 3 + j) * 5 + k) * 5 + l];
    if (!v) table_->entry(x);  // throws with the divergence reason
    return *v;
}

template <class S>
void EtaValues<S>::perturb(const EtaIndex& x, double delta) {
    auto& v = values_[((x.i * 3 + x.j) * 5 + x.k) * 5 + x.l];
    if (v) *v += S(delta);
}

template class EtaValues<double>;
template class EtaValues<Rational>;

// ---------------------------------------------------------------------------
// Metric

template <class S>
MetricBlock<S> metric_block(const EtaValues<S>& e) {
    MetricBlock<S> m;
    m.eta0020 = e(0, 0, 2, 0);
    const S ss = 1 + 2 * e(0, 0, 1, 1) + e(0, 0, 2, 2);
    const S off = e(0, 1, 0, 1);
    m.delta = m.eta0020 * ss - off * off;
    using std::abs;
    if (abs(m.delta) < S(1e-12) * abs(m.eta0020) || m.delta == 0)
        throw NumericError("singular information: delta = " + std::to_string(to_double(m.delta)));
    m.tg00 = ss / m.delta;
    m.tg0s = off / m.delta;
    m.tgss = m.eta0020 / m.delta;
    return m;
}

MetricBlock<double> metric_block(const EtaTable& table) { return metric_block(EtaValues<double>(table)); }

// ---------------------------------------------------------------------------
// Combinator formulas. Each depends only on how many scale slots sit inside
// and outside the parenthesized group.

namespace {

enum class Shape { TwoOne, Three, TwoTwo, ThreeOne, TwoOneOne, Four };

EtaFormula F(int constant, std::initializer_list<std::array<int, 5>> terms) {
    EtaFormula f;
    f.constant = constant;
    for (const auto& t : terms) f.terms.push_back({t[0], {t[1], t[2], t[3], t[4]}});
    return f;
}

EtaFormula negate(EtaFormula f) {
    f.constant = -f.constant;
    for (auto& t : f.terms) t.coef = -t.coef;
    return f;
}

struct FormulaKey {
    Shape shape;
    int a, b;
    auto operator<=>(const FormulaKey&) const = default;
};

const std::map<FormulaKey, EtaFormula>& formula_table() {
    static const std::map<FormulaKey, EtaFormula> table = [] {
        std::map<FormulaKey, EtaFormula> t;
        // (xy)z: a = scale slots inside, b = 1 if z is the scale slot
        t[{Shape::TwoOne, 0, 0}] = negate(F(0, {{1, 0, 1, 1, 0}}));
        t[{Shape::TwoOne, 1, 0}] = negate(F(0, {{1, 0, 1, 1, 1}, {1, 0, 0, 2, 0}}));
        t[{Shape::TwoOne, 0, 1}] = negate(F(0, {{1, 0, 1, 0, 0}, {1, 0, 1, 1, 1}}));
        t[{Shape::TwoOne, 1, 1}] = negate(F(0, {{1, 0, 1, 0, 1}, {1, 0, 1, 1, 2}, {1, 0, 0, 2, 1}}));
        t[{Shape::TwoOne, 2, 0}] = negate(F(0, {{1, 0, 1, 1, 2}, {2, 0, 0, 2, 1}}));
        t[{Shape::TwoOne, 2, 1}] =
            negate(F(1, {{3, 0, 0, 1, 1}, {1, 0, 1, 0, 2}, {2, 0, 0, 2, 2}, {1, 0, 1, 1, 3}}));
        // xyz: a = scale slots
        t[{Shape::Three, 0, 0}] = negate(F(0, {{1, 0, 0, 3, 0}}));
        t[{Shape::Three, 1, 0}] = negate(F(0, {{1, 0, 0, 2, 0}, {1, 0, 0, 3, 1}}));
        t[{Shape::Three, 2, 0}] = negate(F(0, {{2, 0, 0, 2, 1}, {1, 0, 0, 3, 2}}));
        t[{Shape::Three, 3, 0}] = negate(F(1, {{3, 0, 0, 1, 1}, {3, 0, 0, 2, 2}, {1, 0, 0, 3, 3}}));
        // (xy)(zw): a <= b scale slots in the two groups
        t[{Shape::TwoTwo, 0, 0}] = F(0, {{1, 0, 2, 0, 0}});
        t[{Shape::TwoTwo, 0, 1}] = F(0, {{1, 0, 2, 0, 1}, {1, 0, 1, 1, 0}});
        t[{Shape::TwoTwo, 1, 1}] = F(0, {{1, 0, 2, 0, 2}, {2, 0, 1, 1, 1}, {1, 0, 0, 2, 0}});
        t[{Shape::TwoTwo, 0, 2}] = F(0, {{1, 0, 1, 0, 0}, {1, 0, 2, 0, 2}, {2, 0, 1, 1, 1}});
        t[{Shape::TwoTwo, 1, 2}] = F(0, {{1, 0, 1, 0, 1}, {1, 0, 2, 0, 3}, {3, 0, 1, 1, 2}, {2, 0, 0, 2, 1}});
        t[{Shape::TwoTwo, 2, 2}] =
            F(1, {{1, 0, 2, 0, 4}, {4, 0, 0, 2, 2}, {2, 0, 1, 0, 2}, {4, 0, 0, 1, 1}, {4, 0, 1, 1, 3}});
        // (xyz)w: a = scale slots inside, b = 1 if w is the scale slot
        t[{Shape::ThreeOne, 0, 0}] = F(0, {{1, 1, 0, 1, 0}});
        t[{Shape::ThreeOne, 0, 1}] = F(0, {{1, 1, 0, 0, 0}, {1, 1, 0, 1, 1}});
        t[{Shape::ThreeOne, 1, 0}] = F(0, {{2, 0, 1, 1, 0}, {1, 1, 0, 1, 1}});
        t[{Shape::ThreeOne, 2, 0}] = F(0, {{4, 0, 1, 1, 1}, {2, 0, 0, 2, 0}, {1, 1, 0, 1, 2}});
        t[{Shape::ThreeOne, 1, 1}] = F(0, {{2, 0, 1, 0, 0}, {1, 1, 0, 0, 1}, {2, 0, 1, 1, 1}, {1, 1, 0, 1, 2}});
        t[{Shape::ThreeOne, 2, 1}] =
            F(0, {{4, 0, 1, 0, 1}, {1, 1, 0, 0, 2}, {4, 0, 1, 1, 2}, {2, 0, 0, 2, 1}, {1, 1, 0, 1, 3}});
        t[{Shape::ThreeOne, 3, 0}] = F(0, {{6, 0, 1, 1, 2}, {6, 0, 0, 2, 1}, {1, 1, 0, 1, 3}});
        t[{Shape::ThreeOne, 3, 1}] = F(2, {{6, 0, 1, 0, 2},
                                           {6, 0, 0, 1, 1},
                                           {1, 1, 0, 0, 3},
                                           {2, 0, 0, 1, 1},
                                           {6, 0, 1, 1, 3},
                                           {6, 0, 0, 2, 2},
                                           {1, 1, 0, 1, 4}});
        // (xy)zw: a = scale slots inside, b = scale slots outside
        t[{Shape::TwoOneOne, 0, 0}] = F(0, {{1, 0, 1, 2, 0}});
        t[{Shape::TwoOneOne, 0, 1}] = F(0, {{1, 0, 1, 1, 0}, {1, 0, 1, 2, 1}});
        t[{Shape::TwoOneOne, 1, 0}] = F(0, {{1, 0, 1, 2, 1}, {1, 0, 0, 3, 0}});
        t[{Shape::TwoOneOne, 0, 2}] = F(0, {{1, 0, 1, 0, 0}, {2, 0, 1, 1, 1}, {1, 0, 1, 2, 2}});
        t[{Shape::TwoOneOne, 1, 1}] = F(0, {{1, 0, 1, 1, 1}, {1, 0, 0, 2, 0}, {1, 0, 1, 2, 2}, {1, 0, 0, 3, 1}});
        t[{Shape::TwoOneOne, 2, 0}] = F(0, {{1, 0, 0, 2, 0}, {2, 0, 0, 3, 1}, {1, 0, 1, 2, 2}});
        t[{Shape::TwoOneOne, 1, 2}] =
            F(0, {{1, 0, 1, 0, 1}, {2, 0, 1, 1, 2}, {2, 0, 0, 2, 1}, {1, 0, 1, 2, 3}, {1, 0, 0, 3, 2}});
        // Printed with weight 2 and then 1 on eta[0,0,2,1]; kept as printed.
        t[{Shape::TwoOneOne, 2, 1}] =
            F(0, {{2, 0, 0, 2, 1}, {1, 0, 1, 1, 2}, {1, 0, 0, 2, 1}, {2, 0, 0, 3, 2}, {1, 0, 1, 2, 3}});
        t[{Shape::TwoOneOne, 2, 2}] = F(1, {{4, 0, 0, 1, 1},
                                            {1, 0, 1, 0, 2},
                                            {5, 0, 0, 2, 2},
                                            {2, 0, 1, 1, 3},
                                            {2, 0, 0, 3, 3},
                                            {1, 0, 1, 2, 4}});
        // xyzw: a = scale slots
        t[{Shape::Four, 0, 0}] = F(0, {{1, 0, 0, 4, 0}});
        t[{Shape::Four, 1, 0}] = F(0, {{1, 0, 0, 3, 0}, {1, 0, 0, 4, 1}});
        t[{Shape::Four, 2, 0}] = F(0, {{1, 0, 0, 2, 0}, {2, 0, 0, 3, 1}, {1, 0, 0, 4, 2}});
        t[{Shape::Four, 3, 0}] = F(0, {{3, 0, 0, 2, 1}, {3, 0, 0, 3, 2}, {1, 0, 0, 4, 3}});
        t[{Shape::Four, 4, 0}] = F(1, {{4, 0, 0, 1, 1}, {6, 0, 0, 2, 2}, {4, 0, 0, 3, 3}, {1, 0, 0, 4, 4}});
        return t;
    }();
    return table;
}

const EtaFormula& lookup(Shape shape, int a, int b) {
    if (shape == Shape::TwoTwo && a > b) std::swap(a, b);
    return formula_table().at({shape, a, b});
}

int count_s(std::initializer_list<Slot> slots) {
    int n = 0;
    for (Slot s : slots) n += s == Slot::S;
    return n;
}

}  // namespace

EtaFormula eta_pattern_formula(const std::string& pattern) {
    // Split into groups: "(..)" or a single letter.
    std::vector<std::vector<Slot>> groups;
    std::vector<bool> grouped;
    std::size_t i = 0;
    auto bad = [&]() -> ConfigError { return ConfigError("unknown eta pattern shape '" + pattern + "'"); };
    auto slot = [&](char c) {
        if (c == 'B' || c == 'b' || c == '0') return Slot::B;
        if (c == 'S' || c == 's') return Slot::S;
        throw bad();
    };
    while (i < pattern.size()) {
        const char c = pattern[i];
        if (c == ' ') {
            ++i;
        } else if (c == '(') {
            const auto close = pattern.find(')', i);
            if (close == std::string::npos) throw bad();
            std::vector<Slot> g;
            for (std::size_t t = i + 1; t < close; ++t)
                if (pattern[t] != ' ') g.push_back(slot(pattern[t]));
            groups.push_back(std::move(g));
            grouped.push_back(true);
            i = close + 1;
        } else {
            groups.push_back({slot(c)});
            grouped.push_back(false);
            ++i;
        }
    }
    auto ns = [](const std::vector<Slot>& g) {
        return static_cast<int>(std::count(g.begin(), g.end(), Slot::S));
    };
    const std::size_t G = groups.size();
    if (G == 0) throw bad();
    if (grouped[0]) {
        const auto& head = groups[0];
        bool tail_single = true;
        for (std::size_t t = 1; t < G; ++t) tail_single = tail_single && !grouped[t];
        int rest = 0;
        for (std::size_t t = 1; t < G; ++t) rest += ns(groups[t]);
        if (head.size() == 2 && G == 2 && tail_single) return lookup(Shape::TwoOne, ns(head), rest);
        if (head.size() == 3 && G == 2 && tail_single) return lookup(Shape::ThreeOne, ns(head), rest);
        if (head.size() == 2 && G == 3 && tail_single) return lookup(Shape::TwoOneOne, ns(head), rest);
        if (head.size() == 2 && G == 2 && grouped[1] && groups[1].size() == 2)
            return lookup(Shape::TwoTwo, ns(head), ns(groups[1]));
        throw bad();
    }
    for (bool g : grouped)
        if (g) throw bad();
    int total = 0;
    for (const auto& g : groups) total += ns(g);
    if (G == 3) return lookup(Shape::Three, total, 0);
    if (G == 4) return lookup(Shape::Four, total, 0);
    throw bad();
}

template <class S>
S evaluate(const EtaFormula& f, const EtaValues<S>& eta) {
    S r = S(f.constant);
    for (const auto& t : f.terms) r += S(t.coef) * eta(t.index.i, t.index.j, t.index.k, t.index.l);
    return r;
}

template <class S>
S eta_pattern(const EtaValues<S>& eta, const std::string& pattern) {
    return evaluate(eta_pattern_formula(pattern), eta);
}

double eta_pattern(const EtaTable& table, const std::string& pattern) {
    return eta_pattern(EtaValues<double>(table), pattern);
}

std::vector<EtaIndex> referenced_eta_indices() {
    std::set<EtaIndex> idx = {{0, 0, 2, 0}, {0, 0, 1, 1}, {0, 0, 2, 2}, {0, 1, 0, 1}};
    for (const auto& [key, f] : formula_table()) {
        if (key.shape == Shape::ThreeOne) continue;  // not used by the L-terms
        for (const auto& t : f.terms) idx.insert(t.index);
    }
    return {idx.begin(), idx.end()};
}

// ---------------------------------------------------------------------------
// L-terms. Sums over the special index pair {0, sigma} use the inverse metric
// block; the regressor indices 1..p are folded into p, M1, M2a, M2b.

namespace {

template <class S>
struct Combinators {
    S v21[3][2], v3[4], v22[3][3], v211[3][3], v4[5];
    S tg[2][2];

    Combinators(const EtaValues<S>& e, const MetricBlock<S>& mb) {
        for (int a = 0; a <= 2; ++a)
            for (int b = 0; b <= 1; ++b) v21[a][b] = evaluate(lookup(Shape::TwoOne, a, b), e);
        for (int a = 0; a <= 3; ++a) v3[a] = evaluate(lookup(Shape::Three, a, 0), e);
        for (int a = 0; a <= 2; ++a)
            for (int b = 0; b <= 2; ++b) {
                v22[a][b] = evaluate(lookup(Shape::TwoTwo, a, b), e);
                v211[a][b] = evaluate(lookup(Shape::TwoOneOne, a, b), e);
            }
        for (int a = 0; a <= 4; ++a) v4[a] = evaluate(lookup(Shape::Four, a, 0), e);
        tg[0][0] = mb.tg00;
        tg[0][1] = tg[1][0] = mb.tg0s;
        tg[1][1] = mb.tgss;
    }

    static int s(int x) { return x; }
    // Slots are 0 (regression index) or 1 (scale index).
    const S& e2(int a, int b, int c) const { return v21[a + b][c]; }
    const S& e3(int a, int b, int c) const { return v3[a + b + c]; }
    const S& e22(int a, int b, int c, int d) const { return v22[a + b][c + d]; }
    const S& e211(int a, int b, int c, int d) const { return v211[a + b][c + d]; }
    const S& e4(int a, int b, int c, int d) const { return v4[a + b + c + d]; }
    const S& g(int a, int b) const { return tg[a][b]; }

    template <class Fn>
    S sum2(Fn f) const {
        S r = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) r += g(a, b) * f(a, b);
        return r;
    }
    template <class Fn>
    S sum4(Fn f) const {
        S r = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) r += g(i, j) * g(k, l) * f(i, j, k, l);
        return r;
    }
    template <class Fn>
    S sum6(Fn f) const {
        S r = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l)
                        for (int s = 0; s < 2; ++s)
                            for (int u = 0; u < 2; ++u)
                                r += g(i, j) * g(k, l) * g(s, u) * f(i, j, k, l, s, u);
        return r;
    }
};

}  // namespace

template <class S>
LTerms<S> l_terms(const EtaValues<S>& eta, const AggregatedMoments<S>& m, int p_int) {
    const MetricBlock<S> mb = metric_block(eta);
    const Combinators<S> c(eta, mb);
    const S ih = 1 / mb.eta0020;
    const S ih2 = ih * ih, ih3 = ih2 * ih;
    const S p = S(p_int);
    LTerms<S> L;

    // Third-order terms with two index triples, (M2a | M2b) type.
    auto third_a = [&](auto x, auto y) {
        return ih3 * m.M2a * x(0, 0, 0) * y(0, 0, 0) +
               ih2 * p * c.sum2([&](int s, int u) { return x(0, 0, s) * y(0, 0, u); }) +
               ih2 * p * c.sum2([&](int k, int l) { return x(0, k, 0) * y(0, l, 0); }) +
               ih2 * p * c.sum2([&](int i, int j) { return x(i, 0, 0) * y(j, 0, 0); }) +
               c.sum6([&](int i, int j, int k, int l, int s, int u) { return x(i, k, s) * y(j, l, u); });
    };
    auto E2 = [&](int a, int b, int d) { return c.e2(a, b, d); };
    auto E3 = [&](int a, int b, int d) { return c.e3(a, b, d); };
    L.l21 = third_a(E2, E3);
    L.l23 = third_a(E3, E3);
    L.l25 = third_a(E2, E2);

    // The M2b type pairs x(i,j,k) with y(l,s,u) contracted across the triples;
    // y's index order differs between the products.
    auto third_b = [&](auto x, auto yb) {
        return ih3 * m.M2b * x(0, 0, 0) * yb(0, 0, 0) +
               ih2 * p * p * c.sum2([&](int k, int l) { return x(0, 0, k) * yb(l, 0, 0); }) +
               ih * p * c.sum4([&](int k, int l, int s, int u) { return x(0, 0, k) * yb(l, s, u); }) +
               ih * p * c.sum4([&](int i, int j, int k, int l) { return x(i, j, k) * yb(l, 0, 0); }) +
               c.sum6([&](int i, int j, int k, int l, int s, int u) { return x(i, j, k) * yb(l, s, u); });
    };
    L.l22 = third_b(E2, E3);
    L.l24 = third_b(E3, E3);
    // For L26 the second factor is eta_(su)l: group on its last two arguments.
    auto E2rev = [&](int l, int s, int u) { return c.e2(s, u, l); };
    L.l26 = third_b(E2, E2rev);

    // Fourth-order terms.
    auto fourth = [&](const S& head, auto f) {
        return ih2 * m.M1 * head + ih * p * c.sum2([&](int k, int l) { return f(0, 0, k, l); }) +
               ih * p * c.sum2([&](int i, int j) { return f(i, j, 0, 0); }) +
               c.sum4([&](int i, int j, int k, int l) { return f(i, j, k, l); });
    };
    // f(i,j,k,l) is the summand paired with g^{ij} g^{kl}.
    L.l11 = fourth(c.e211(0, 0, 0, 0), [&](int i, int j, int k, int l) { return c.e211(i, l, j, k); });
    // Leading factor eta_(00)(00), as in the program that produced the
    // published coefficient tables (the reduction display shows eta_(00)00).
    L.l12 = fourth(c.e22(0, 0, 0, 0), [&](int i, int j, int k, int l) { return c.e211(i, j, k, l); });
    L.l13 = fourth(c.e4(0, 0, 0, 0), [&](int i, int j, int k, int l) { return c.e4(i, j, k, l); });
    L.l14 = fourth(c.e22(0, 0, 0, 0), [&](int i, int j, int k, int l) { return c.e22(i, k, j, l); });
    L.l15 = fourth(c.e22(0, 0, 0, 0), [&](int i, int j, int k, int l) { return c.e22(i, j, k, l); });
    return L;
}

template <class S>
GeometricInvariants<S> geometric_invariants(const LTerms<S>& l, const S& dim) {
    GeometricInvariants<S> g;
    g.ffe = 2 * l.l11 + l.l12 + l.l13 - 2 * l.l21 - l.l23 - l.l22;
    g.tt1 = l.l23;
    g.tt2 = l.l24;
    g.rre = l.l14 - l.l15 + l.l11 - l.l12 - l.l25 + l.l26 + l.l22 - l.l21;
    g.aaee1 = l.l14 - l.l25 - dim;
    g.aaee2 = l.l15 - l.l26 - dim * dim;
    g.aaem1 = l.l11 + l.l14 - l.l25 - l.l21;
    g.aaem2 = l.l12 + l.l15 - l.l26 - l.l22;
    return g;
}

template <class S>
RiskExpansionT<S> risk_expansion(const GeometricInvariants<S>& g, int p, const S& dim) {
    // Bracket in a' = (1 - alpha)/2: A a'^2 + B a' + C, divided by 24.
    const S A = 3 * g.ffe + 3 * g.tt1 - 6 * g.aaem1 + 6 * g.aaee1 - 3 * g.aaem2 + 3 * g.aaee2 +
                3 * dim * dim + 6 * dim;
    const S B = 3 * g.ffe - 5 * g.tt1 - 6 * g.tt2 + 6 * g.aaem1 - 6 * g.aaee1 + 3 * g.aaem2 -
                3 * g.aaee2 - 3 * dim * dim - 6 * dim;
    const S C = 12 * g.aaee1 - 2 * g.aaem1 - g.aaem2 + g.tt1 + 9 * g.tt2 + 8 * g.rre - 9 * g.ffe;
    RiskExpansionT<S> r;
    r.p = p;
    r.main = S(p + 2) / 2;
    r.qa = A / 96;
    r.qb = -(A + B) / 48;
    r.qc = (A / 4 + B / 2 + C) / 24;
    r.validity_n_min = validity_n_min(to_double(r.main), to_double(r.q(S(-1))), p);
    return r;
}

RiskExpansion to_double(const RiskExpansionT<Rational>& r) {
    RiskExpansion d;
    d.p = r.p;
    d.main = to_double(r.main);
    d.qa = to_double(r.qa);
    d.qb = to_double(r.qb);
    d.qc = to_double(r.qc);
    d.validity_n_min = r.validity_n_min;
    return d;
}

long validity_n_min(double main, double q, int p) {
    auto ok = [&](long n) {
        const double dn = static_cast<double>(n);
        const double positive = main * dn + q;
        const double decreasing = main * dn * (dn + 1) + q * (2 * dn + 1);
        return positive > 0 && decreasing > 0;
    };
    // Both conditions are monotone in n, so jump close to the boundary first.
    long n = p + 3;
    if (q < 0 && main > 0) n = std::max<long>(n, static_cast<long>(-2 * q / main) - 4);
    while (n > p + 3 && ok(n - 1)) --n;
    while (!ok(n)) ++n;
    return n;
}

RiskValue evaluate_risk(const RiskExpansion& r, double alpha, long n) {
    if (n < 1) throw ConfigError("n must be at least 1");
    const double dn = static_cast<double>(n);
    return {r.main / dn + r.q(alpha) / (dn * dn), n < r.validity_n_min};
}

// ---------------------------------------------------------------------------

template <class S>
RiskExpansionT<S> assemble_risk(const EtaValues<S>& eta, const AggregatedMoments<S>& m, int p,
                                std::optional<S> dim) {
    const S d = dim ? *dim : S(p);
    const LTerms<S> L = l_terms(eta, m, p);
    return risk_expansion(geometric_invariants(L, d), p, d);
}

namespace {

std::array<double, 3> propagate_errors(const EtaTable& table, const AggregatedMoments<double>& m, int p,
                                       const RiskExpansion& base) {
    std::array<double, 3> err{0.0, 0.0, 0.0};
    for (const auto& x : referenced_eta_indices()) {
        const double bound = table.entry(x).abs_error_bound;
        if (bound <= 0) continue;
        EtaValues<double> v(table);
        v.perturb(x, bound);
        const RiskExpansion r = assemble_risk(v, m, p);
        err[0] += std::abs(r.qa - base.qa);
        err[1] += std::abs(r.qb - base.qb);
        err[2] += std::abs(r.qc - base.qc);
    }
    return err;
}

}  // namespace

RiskReport compute_risk(const EtaTable& table, const MomentSummary<Rational>& moments) {
    validate(moments);
    if (!table.exact()) return compute_risk(table, to_double(moments));
    const AggregatedMoments<Rational> m = to_aggregated(moments);
    const EtaValues<Rational> eta(table);
    RiskReport rep;
    rep.exact = assemble_risk(eta, m, moments.p);
    rep.expansion = to_double(*rep.exact);
    rep.full_dimension_variant = to_double(assemble_risk(eta, m, moments.p, std::optional<Rational>(moments.p + 2)));
    // Closed-form tables carry only rounding error in their doubles.
    rep.coeff_error = {0.0, 0.0, 0.0};
    return rep;
}

RiskReport compute_risk(const EtaTable& table, const MomentSummary<double>& moments) {
    validate(moments);
    const AggregatedMoments<double> m = to_aggregated(moments);
    const EtaValues<double> eta(table);
    RiskReport rep;
    rep.expansion = assemble_risk(eta, m, moments.p);
    rep.full_dimension_variant = assemble_risk(eta, m, moments.p, std::optional<double>(moments.p + 2.0));
    rep.coeff_error = propagate_errors(table, m, moments.p, rep.expansion);
    return rep;
}

// ---------------------------------------------------------------------------

template MetricBlock<double> metric_block(const EtaValues<double>&);
template MetricBlock<Rational> metric_block(const EtaValues<Rational>&);
template double evaluate(const EtaFormula&, const EtaValues<double>&);
template Rational evaluate(const EtaFormula&, const EtaValues<Rational>&);
template double eta_pattern(const EtaValues<double>&, const std::string&);
template Rational eta_pattern(const EtaValues<Rational>&, const std::string&);
template LTerms<double> l_terms(const EtaValues<double>&, const AggregatedMoments<double>&, int);
template LTerms<Rational> l_terms(const EtaValues<Rational>&, const AggregatedMoments<Rational>&, int);
template GeometricInvariants<double> geometric_invariants(const LTerms<double>&, const double&);
template GeometricInvariants<Rational> geometric_invariants(const LTerms<Rational>&, const Rational&);
template RiskExpansionT<double> risk_expansion(const GeometricInvariants<double>&, int, const double&);
template RiskExpansionT<Rational> risk_expansion(const GeometricInvariants<Rational>&, int, const Rational&);
template RiskExpansionT<double> assemble_risk(const EtaValues<double>&, const AggregatedMoments<double>&, int,
                                              std::optional<double>);
template RiskExpansionT<Rational> assemble_risk(const EtaValues<Rational>&, const AggregatedMoments<Rational>&,
                                                int, std::optional<Rational>);

}  // namespace regrisk
