#include "regrisk/eta.hpp"

#include "regrisk/error.hpp"
#include "regrisk/parallel.hpp"
#include "regrisk/quadrature.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace regrisk {

std::string EtaIndex::key() const {
    return std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + "," + std::to_string(l);
}

const char* to_string(EtaMethod m) {
    switch (m) {
    case EtaMethod::ClosedForm: return "closed_form";
    case EtaMethod::Quadrature: return "quadrature";
    case EtaMethod::MonteCarlo: return "monte_carlo";
    }
    return "?";
}

bool EtaTable::in_grid(const EtaIndex& x) {
    return x.i >= 0 && x.i <= kMaxI && x.j >= 0 && x.j <= kMaxJ && x.k >= 0 && x.k <= kMaxK &&
           x.l >= 0 && x.l <= kMaxL;
}

std::vector<EtaIndex> EtaTable::grid() {
    std::vector<EtaIndex> g;
    for (int i = 0; i <= kMaxI; ++i)
        for (int j = 0; j <= kMaxJ; ++j)
            for (int k = 0; k <= kMaxK; ++k)
                for (int l = 0; l <= kMaxL; ++l) g.push_back({i, j, k, l});
    return g;
}

int EtaTable::flat(const EtaIndex& x) {
    if (!in_grid(x)) throw ConfigError("eta index out of range: [" + x.key() + "]");
    return ((x.i * (kMaxJ + 1) + x.j) * (kMaxK + 1) + x.k) * (kMaxL + 1) + x.l;
}

void EtaTable::set(const EtaIndex& x, const EtaEntry& e, std::optional<Rational> exact) {
    const int f = flat(x);
    entries_[f] = e;
    exact_[f] = std::move(exact);
    divergent_[f].clear();
}

void EtaTable::mark_divergent(const EtaIndex& x, std::string reason) {
    const int f = flat(x);
    entries_[f].reset();
    exact_[f].reset();
    divergent_[f] = reason.empty() ? "moment diverges" : std::move(reason);
}

bool EtaTable::available(const EtaIndex& x) const { return entries_[flat(x)].has_value(); }
bool EtaTable::divergent(const EtaIndex& x) const { return !divergent_[flat(x)].empty(); }
const std::string& EtaTable::divergence_reason(const EtaIndex& x) const { return divergent_[flat(x)]; }

const EtaEntry& EtaTable::entry(const EtaIndex& x) const {
    const int f = flat(x);
    if (!entries_[f]) {
        if (!divergent_[f].empty())
            throw NumericError("eta[" + x.key() + "] is not available for " + model_name_ + ": " +
                               divergent_[f]);
        throw NumericError("eta[" + x.key() + "] missing from table");
    }
    return *entries_[f];
}

bool EtaTable::exact() const {
    bool any = false;
    for (int f = 0; f < kSize; ++f) {
        if (!entries_[f]) continue;
        if (!exact_[f]) return false;
        any = true;
    }
    return any;
}

const Rational& EtaTable::exact_value(const EtaIndex& x) const {
    const int f = flat(x);
    if (!exact_[f]) {
        entry(x);
        throw NumericError("eta[" + x.key() + "] has no exact value");
    }
    return *exact_[f];
}

std::vector<InvariantCheck> EtaTable::check_invariants() const {
    std::vector<InvariantCheck> out;
    constexpr double kRound = 64 * std::numeric_limits<double>::epsilon();
    auto v = [&](int i, int j, int k, int l) { return entry({i, j, k, l}).value; };
    auto b = [&](int i, int j, int k, int l) { return entry({i, j, k, l}).abs_error_bound; };
    auto add = [&](std::string name, double residual, double tol, double scale) {
        tol += kRound * std::max(1.0, scale);
        out.push_back({std::move(name), residual, tol, std::abs(residual) <= tol});
    };
    add("eta[0,0,0,0] = 1", v(0, 0, 0, 0) - 1.0, b(0, 0, 0, 0), 1.0);
    add("eta[0,0,1,0] = 0", v(0, 0, 1, 0), b(0, 0, 1, 0), 1.0);
    add("eta[0,0,2,0] = -eta[0,1,0,0]", v(0, 0, 2, 0) + v(0, 1, 0, 0), b(0, 0, 2, 0) + b(0, 1, 0, 0),
        std::abs(v(0, 0, 2, 0)));
    add("eta[0,0,2,1] = -eta[0,1,0,1]", v(0, 0, 2, 1) + v(0, 1, 0, 1), b(0, 0, 2, 1) + b(0, 1, 0, 1),
        std::abs(v(0, 0, 2, 1)));
    {
        const double lhs = 1 + 2 * v(0, 0, 1, 1) + v(0, 0, 2, 2);
        const double rhs = -(1 + v(0, 1, 0, 2) + 2 * v(0, 0, 1, 1));
        add("1+2eta[0,0,1,1]+eta[0,0,2,2] = -(1+eta[0,1,0,2]+2eta[0,0,1,1])", lhs - rhs,
            4 * b(0, 0, 1, 1) + b(0, 0, 2, 2) + b(0, 1, 0, 2), std::abs(lhs));
    }
    {
        const double h = v(0, 0, 2, 0);
        InvariantCheck c{"eta[0,0,2,0] > 0", h, b(0, 0, 2, 0), h > b(0, 0, 2, 0)};
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

BigInt double_factorial(int n) {
    BigInt r = 1;
    for (; n > 1; n -= 2) r *= n;
    return r;
}

Rational rpow(const Rational& x, int e) {
    Rational r = 1;
    const int n = std::abs(e);
    for (int t = 0; t < n; ++t) r *= x;
    return e < 0 ? Rational(1 / r) : r;
}

// Gamma(x + n) / Gamma(x) for integer n of either sign.
Rational pochhammer(const Rational& x, int n) {
    Rational r = 1;
    if (n >= 0) {
        for (int t = 0; t < n; ++t) r *= x + t;
    } else {
        for (int t = 1; t <= -n; ++t) r /= x - t;
    }
    return r;
}

// c(nu) * H(a, nu + 2m): the t(nu) expectation of y^a (nu + y^2)^{-m} scaled
// by the factor collected in the closed form below.
Rational t_moment_factor(int a, int m, const Rational& nu) {
    if (a % 2) return 0;
    const int h = a / 2;
    return rpow(nu, h) * Rational(double_factorial(a - 1)) / Rational(BigInt(1) << h) *
           pochhammer(nu / 2, m - h) / pochhammer((nu + 1) / 2, m);
}

int binom_int(int n, int k) {
    int r = 1;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return r;
}

}  // namespace

Rational eta_normal(int i, int j, int k, int l) {
    if (!EtaTable::in_grid({i, j, k, l}))
        throw ConfigError("eta index out of range: [" + EtaIndex{i, j, k, l}.key() + "]");
    if (i >= 1 || (k + l) % 2) return 0;
    Rational r(double_factorial(k + l - 1));
    return (j + k) % 2 ? Rational(-r) : r;
}

bool eta_t_converges(int i, int j, int k, int l, const Rational& nu) {
    // The integrand behaves like |y|^{a - nu - 1 - 2m} with the largest a.
    const int m = 3 * i + 2 * j + k;
    const int a_max = 3 * i + 2 * j + k + l;
    return Rational(a_max) < nu + 2 * m;
}

Rational eta_t(int i, int j, int k, int l, const Rational& nu) {
    if (!EtaTable::in_grid({i, j, k, l}))
        throw ConfigError("eta index out of range: [" + EtaIndex{i, j, k, l}.key() + "]");
    if (nu <= 0) throw ConfigError("t degrees of freedom must be positive");
    if (!eta_t_converges(i, j, k, l, nu))
        throw NumericError("moment diverges: eta[" + EtaIndex{i, j, k, l}.key() + "] for t(" +
                           to_string(nu) + ")");
    // d3 = 2(nu+1) y (3nu - y^2) / w^3, d2 = (nu+1)(y^2 - nu)/w^2, d1 = -(nu+1) y / w
    // with w = nu + y^2; expanding (3nu - y^2)^i and (y^2 - nu)^j binomially
    // leaves sums of E[y^a w^{-m}].
    const int m = 3 * i + 2 * j + k;
    Rational total = 0;
    for (int s = 0; s <= i; ++s) {
        for (int t = 0; t <= j; ++t) {
            const int a = i + k + l + 2 * s + 2 * t;
            if (a % 2) continue;
            const int sign_exp = 2 * i + j + k - s - t;
            Rational c = Rational(BigInt(1) << i) * rpow(nu + 1, i + j + k) *
                         rpow(nu, -s - t - 2 * i - j - k) * binom_int(i, s) * binom_int(j, t) *
                         rpow(Rational(3), i - s);
            if (sign_exp % 2) c = -c;
            total += c * t_moment_factor(a, m, nu);
        }
    }
    return total;
}

EtaEntry eta_quadrature(const ErrorModel& model, int i, int j, int k, int l, double tol) {
    if (!(tol > 0)) throw ConfigError("quadrature tolerance must be positive");
    const EtaIndex x{i, j, k, l};
    if (!EtaTable::in_grid(x)) throw ConfigError("eta index out of range: [" + x.key() + "]");
    auto integrand = [&](double y) {
        const double f = model.pdf(y);
        if (f == 0.0) return 0.0;
        double v = f * std::pow(y, l);
        if (i) v *= model.d3(y);
        for (int t = 0; t < j; ++t) v *= model.d2(y);
        if (k) v *= std::pow(model.d1(y), k);
        return v;
    };
    const QuadratureResult r = integrate_real_line(integrand, tol);
    if (!r.converged) {
        std::ostringstream os;
        os.precision(3);
        os << "quadrature failed to converge for eta[" << x.key() << "] (" << model.describe()
           << "): achieved bound " << r.abs_error;
        throw NumericError(os.str());
    }
    return {r.value, r.abs_error, EtaMethod::Quadrature};
}

EtaEntry eta_monte_carlo(const ErrorModel& model, int i, int j, int k, int l, std::uint64_t draws,
                         std::uint64_t seed) {
    if (draws < 2) throw ConfigError("Monte-Carlo eta needs at least two draws");
    std::mt19937_64 rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t n = 1; n <= draws; ++n) {
        const double y = sample_error(model, rng);
        double v = std::pow(y, l);
        if (i) v *= model.d3(y);
        for (int t = 0; t < j; ++t) v *= model.d2(y);
        if (k) v *= std::pow(model.d1(y), k);
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    const double var = m2 / static_cast<double>(draws - 1);
    return {mean, std::sqrt(var / static_cast<double>(draws)), EtaMethod::MonteCarlo};
}

namespace {

EtaTable quadrature_table(const ErrorModel& model, double tol, int threads, bool mark_failures) {
    EtaTable table(model.describe());
    const auto g = EtaTable::grid();
    std::vector<std::optional<EtaEntry>> results(g.size());
    std::vector<std::string> failures(g.size());
    parallel_for(g.size(), resolve_threads(threads), [&](std::size_t n) {
        const auto& x = g[n];
        try {
            results[n] = eta_quadrature(model, x.i, x.j, x.k, x.l, tol);
        } catch (const NumericError& e) {
            if (!mark_failures) throw;
            failures[n] = e.what();
        }
    });
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (results[n]) table.set(g[n], *results[n]);
        else table.mark_divergent(g[n], failures[n]);
    }
    return table;
}

}  // namespace

EtaTable build_eta_table(const ErrorModel& model, double tol, int threads) {
    if (!(tol > 0)) throw ConfigError("eta tolerance must be positive");
    EtaTable table(model.describe());
    switch (model.kind()) {
    case ErrorKind::Normal:
        for (const auto& x : EtaTable::grid()) {
            Rational r = eta_normal(x.i, x.j, x.k, x.l);
            table.set(x, {to_double(r), 0.0, EtaMethod::ClosedForm}, r);
        }
        break;
    case ErrorKind::StudentT: {
        const Rational nu = *model.exact_nu();
        for (const auto& x : EtaTable::grid()) {
            if (!eta_t_converges(x.i, x.j, x.k, x.l, nu)) {
                table.mark_divergent(x, "moment diverges for t(" + model.describe().substr(2) + ")");
                continue;
            }
            Rational r = eta_t(x.i, x.j, x.k, x.l, nu);
            const double v = to_double(r);
            table.set(x, {v, std::abs(v) * std::numeric_limits<double>::epsilon(), EtaMethod::ClosedForm}, r);
        }
        break;
    }
    default:
        // Every grid entry of a skew-normal or custom table must exist; a
        // failure is reported with its index.
        table = quadrature_table(model, tol, threads, false);
        break;
    }
    table.record_invariants();
    for (const auto& c : table.recorded_invariants())
        if (!c.ok) throw NumericError("eta table invariant violated for " + model.describe() + ": " + c.name);
    return table;
}

EtaTable build_eta_table_by_quadrature(const ErrorModel& model, double tol, int threads) {
    EtaTable table = quadrature_table(model, tol, threads, true);
    if (model.kind() == ErrorKind::StudentT) {
        // Quadrature of a divergent integral can stall at a finite number;
        // defer to the exact convergence rule for t.
        for (const auto& x : EtaTable::grid())
            if (!eta_t_converges(x.i, x.j, x.k, x.l, *model.exact_nu()))
                table.mark_divergent(x, "moment diverges");
    }
    table.record_invariants();
    return table;
}

}  // namespace regrisk
