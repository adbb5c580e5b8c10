#include "regrisk/mc_oracle.hpp"

#include "regrisk/error.hpp"
#include "regrisk/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace regrisk {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

void SimConfig::validate() const {
    if (!(sigma > 0)) throw ConfigError("sigma must be positive");
    if (x.p < 1) throw ConfigError("p must be at least 1");
    if (n < x.p + 3) throw ConfigError("n must be at least p + 3");
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (!beta.empty() && static_cast<int>(beta.size()) != x.p + 1)
        throw ConfigError("beta must have p + 1 entries");
    if (model.kind() == ErrorKind::Custom) throw ConfigError("Monte-Carlo validation needs a samplable error model");
}

std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t replication) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
    return std::mt19937_64(seq);
}

Eigen::MatrixXd draw_regressors(const XDistribution& x, long n, std::mt19937_64& rng) {
    Eigen::MatrixXd out(n, x.p);
    std::normal_distribution<double> z;
    switch (x.kind) {
    case XPreset::Normal:
        for (long t = 0; t < n; ++t)
            for (int i = 0; i < x.p; ++i) out(t, i) = z(rng);
        break;
    case XPreset::Controlled: {
        std::bernoulli_distribution coin(0.5);
        for (long t = 0; t < n; ++t)
            for (int i = 0; i < x.p; ++i) out(t, i) = coin(rng) ? 1.0 : -1.0;
        break;
    }
    case XPreset::StudentT: {
        // z sqrt(nu / W) has covariance nu/(nu-2) I; rescale to identity.
        const double nu = to_double(x.param);
        std::chi_squared_distribution<double> chi(nu);
        for (long t = 0; t < n; ++t) {
            const double scale = std::sqrt((nu - 2) / chi(rng));
            for (int i = 0; i < x.p; ++i) out(t, i) = z(rng) * scale;
        }
        break;
    }
    case XPreset::Pareto: {
        const double b = to_double(x.param);
        const double mean = b / (b - 1);
        const double sd = std::sqrt(b / ((b - 1) * (b - 1) * (b - 2)));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (long t = 0; t < n; ++t)
            for (int i = 0; i < x.p; ++i) out(t, i) = (std::pow(1.0 - u(rng), -1.0 / b) - mean) / sd;
        break;
    }
    }
    return out;
}

Sample simulate(const SimConfig& c, std::uint64_t replication) {
    c.validate();
    auto rng = replication_rng(c.seed, replication);
    Sample s;
    s.X.resize(c.n, c.x.p + 1);
    s.X.col(0).setOnes();
    s.X.rightCols(c.x.p) = draw_regressors(c.x, c.n, rng);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(c.x.p + 1);
    for (std::size_t i = 0; i < c.beta.size(); ++i) beta(static_cast<Eigen::Index>(i)) = c.beta[i];
    s.y = s.X * beta;
    for (long t = 0; t < c.n; ++t) s.y(t) += c.sigma * sample_error(c.model, rng);
    return s;
}

// ---------------------------------------------------------------------------
// MLE

namespace {

struct Objective {
    const Sample& s;
    const ErrorModel& m;

    // Negative mean log-likelihood in v = (beta, log sigma) and its gradient.
    double value(const Eigen::VectorXd& v, Eigen::VectorXd* grad) const {
        const Eigen::Index q = s.X.cols();
        const double ls = v(q);
        const double sigma = std::exp(ls);
        const Eigen::VectorXd r = (s.y - s.X * v.head(q)) / sigma;
        // A trial step can underflow sigma; the line search rejects it.
        if (!r.allFinite()) return std::numeric_limits<double>::infinity();
        const double n = static_cast<double>(r.size());
        double f = 0.0;
        Eigen::VectorXd d1(r.size());
        for (Eigen::Index t = 0; t < r.size(); ++t) {
            f -= m.log_pdf(r(t));
            d1(t) = m.d1(r(t));
        }
        f = f / n + ls;
        if (grad) {
            grad->resize(q + 1);
            grad->head(q) = s.X.transpose() * d1 / (sigma * n);
            (*grad)(q) = d1.dot(r) / n + 1.0;
        }
        return f;
    }

    // Hessian of the negative mean log-likelihood.
    Eigen::MatrixXd hessian(const Eigen::VectorXd& v) const {
        const Eigen::Index q = s.X.cols();
        const double sigma = std::exp(v(q));
        const Eigen::VectorXd r = (s.y - s.X * v.head(q)) / sigma;
        const double n = static_cast<double>(r.size());
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(q + 1, q + 1);
        for (Eigen::Index t = 0; t < r.size(); ++t) {
            const double a = m.d1(r(t)), b = m.d2(r(t));
            const auto x = s.X.row(t).transpose();
            H.topLeftCorner(q, q).noalias() -= (b / (sigma * sigma)) * x * x.transpose();
            H.col(q).head(q) -= ((b * r(t) + a) / sigma) * x;
            H(q, q) -= b * r(t) * r(t) + a * r(t);
        }
        H.row(q).head(q) = H.col(q).head(q).transpose();
        return H / n;
    }
};

}  // namespace

MleResult mle_fit(const Sample& s, const ErrorModel& model, const std::optional<Theta>& init, int max_iterations,
                  double grad_tol) {
    const Eigen::Index q = s.X.cols();
    if (s.X.rows() < q + 1) throw ConfigError("mle_fit needs n >= p + 2");
    Eigen::VectorXd v(q + 1);
    if (init) {
        v.head(q) = init->beta;
        v(q) = std::log(init->sigma);
    } else {
        const Eigen::VectorXd b = s.X.colPivHouseholderQr().solve(s.y);
        const double rms = std::sqrt((s.y - s.X * b).squaredNorm() / static_cast<double>(s.y.size()));
        v.head(q) = b;
        v(q) = std::log(std::max(rms, 1e-300));
    }
    const Objective obj{s, model};
    Eigen::VectorXd g;
    double f = obj.value(v, &g);

    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(q + 1, q + 1);
    {
        const Eigen::MatrixXd H = obj.hessian(v);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 1e-10) Hinv = H.inverse();
    }

    MleResult res;
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (g.lpNorm<Eigen::Infinity>() < grad_tol) break;
        Eigen::VectorXd dir = -Hinv * g;
        if (dir.dot(g) >= 0) {
            Hinv.setIdentity();
            dir = -g;
        }
        // Backtracking line search (Armijo).
        double step = 1.0;
        Eigen::VectorXd v_new, g_new;
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            v_new = v + step * dir;
            f_new = obj.value(v_new, &g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * g.dot(dir)) {
                accepted = true;
                break;
            }
            // Near the optimum the decrease is below the rounding of f; fall
            // back to requiring a smaller gradient.
            if (std::isfinite(f_new) && std::abs(f_new - f) <= 64 * kEps * std::abs(f) &&
                g_new.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const Eigen::VectorXd sv = v_new - v;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = sv.dot(yv);
        if (sy > 1e-300) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(q + 1, q + 1);
            Hinv = (I - rho * sv * yv.transpose()) * Hinv * (I - rho * yv * sv.transpose()) +
                   rho * sv * sv.transpose();
        }
        v = v_new;
        g = g_new;
        f = f_new;
    }
    res.theta.beta = v.head(q);
    res.theta.sigma = std::exp(v(q));
    res.iterations = it;
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    res.converged = res.grad_norm < grad_tol;
    return res;
}

// ---------------------------------------------------------------------------
// Divergence

namespace {

// Fixed sinh-sinh rule in the standardized variable z, with every other node
// forming the coarse level used for the error estimate.
struct DensityRule {
    std::vector<double> z, w, logf;  // w already includes f(z)
    std::vector<bool> coarse;
    double h = 0.0;

    explicit DensityRule(const ErrorModel& m) {
        constexpr double kT = 4.0;
        h = 1.0 / 32;
        const int half = static_cast<int>(kT / h);
        for (int j = -half; j <= half; ++j) {
            const double t = j * h;
            const double u = std::numbers::pi / 2 * std::sinh(t);
            const double zz = std::sinh(u);
            const double jac = std::numbers::pi / 2 * std::cosh(t) * std::cosh(u);
            const double lf = m.log_pdf(zz);
            const double f = std::exp(lf);
            if (!(f > 0) || !std::isfinite(jac)) continue;
            z.push_back(zz);
            w.push_back(h * jac * f);
            logf.push_back(lf);
            coarse.push_back(j % 2 == 0);
        }
    }
};

std::optional<double> integral_at(const DensityRule& rule, const ErrorModel& m, double mu_diff, double s1, double s2,
                                  double alpha) {
    // Fine and coarse sums of the integrand against f(z) dz.
    double fine = 0.0, coarse = 0.0;
    auto accumulate = [&](auto g) {
        for (std::size_t q = 0; q < rule.z.size(); ++q) {
            const double v = rule.w[q] * g(q);
            fine += v;
            if (rule.coarse[q]) coarse += v;
        }
    };
    if (alpha == -1.0 || alpha == 1.0) {
        // KL(A : B) with y = muA + sA z under f_A.
        const bool swap = alpha == 1.0;
        const double sA = swap ? s2 : s1, sB = swap ? s1 : s2;
        const double shift = swap ? -mu_diff : mu_diff;
        const double lratio = std::log(sB / sA);
        accumulate([&](std::size_t q) {
            const double wz = (sA * rule.z[q] + shift) / sB;
            return rule.logf[q] - m.log_pdf(wz) + lratio;
        });
    } else {
        const double a = (1 - alpha) / 2;
        const double lratio = std::log(s1 / s2);
        accumulate([&](std::size_t q) {
            const double wz = (s1 * rule.z[q] + mu_diff) / s2;
            return std::exp((1 - a) * (m.log_pdf(wz) - rule.logf[q] + lratio));
        });
    }
    coarse *= 2;
    const double scale = std::max(1.0, std::abs(fine));
    if (!std::isfinite(fine) || std::abs(fine - coarse) > 1e-9 * scale) return std::nullopt;
    if (alpha == -1.0 || alpha == 1.0) return fine;
    return 4 / (1 - alpha * alpha) * (1 - fine);
}

std::vector<std::pair<double, double>> gauss_hermite(int n) {
    // Probabilists' Hermite nodes/weights (weight function N(0,1)) by Golub-Welsch.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < n; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        out.emplace_back(es.eigenvalues()(k), v0 * v0);
    }
    return out;
}

}  // namespace

std::optional<double> divergence_at(const ErrorModel& model, double mu_diff, double s1, double s2, double alpha) {
    const DensityRule rule(model);
    return integral_at(rule, model, mu_diff, s1, s2, alpha);
}

DivergenceResult divergence(const ErrorModel& model, const Theta& t1, const Theta& t2, double alpha,
                            const XSample& xs) {
    if (!(t1.sigma > 0) || !(t2.sigma > 0)) throw ConfigError("sigma must be positive");
    const DensityRule rule(model);
    const Eigen::VectorXd mu = xs.points * (t1.beta - t2.beta);
    DivergenceResult r;
    double total = 0.0, wsum = 0.0;
    for (Eigen::Index q = 0; q < mu.size(); ++q) {
        const auto v = integral_at(rule, model, mu(q), t1.sigma, t2.sigma, alpha);
        if (!v) {
            ++r.failures;
            continue;
        }
        total += xs.weights(q) * *v;
        wsum += xs.weights(q);
    }
    r.value = wsum > 0 ? total / wsum : std::numeric_limits<double>::quiet_NaN();
    return r;
}

XSample x_expectation_sample(const XDistribution& x, const Theta& t1, const Theta& t2, std::mt19937_64& rng,
                             int draws) {
    XSample xs;
    const int p = x.p;
    if (x.kind == XPreset::Normal) {
        const Eigen::VectorXd d = (t1.beta - t2.beta).tail(p);
        const double len = d.norm();
        if (len == 0) {
            xs.points = Eigen::MatrixXd::Zero(1, p + 1);
            xs.points(0, 0) = 1;
            xs.weights = Eigen::VectorXd::Ones(1);
            return xs;
        }
        const auto gh = gauss_hermite(40);
        xs.points.resize(static_cast<Eigen::Index>(gh.size()), p + 1);
        xs.weights.resize(static_cast<Eigen::Index>(gh.size()));
        for (std::size_t k = 0; k < gh.size(); ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            xs.points(row, 0) = 1;
            xs.points.row(row).tail(p) = (gh[k].first / len) * d.transpose();
            xs.weights(row) = gh[k].second;
        }
        return xs;
    }
    if (x.kind == XPreset::Controlled && p <= 16) {
        const long count = 1L << p;
        xs.points.resize(count, p + 1);
        xs.weights = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
        for (long c = 0; c < count; ++c) {
            xs.points(c, 0) = 1;
            for (int i = 0; i < p; ++i) xs.points(c, i + 1) = (c >> i) & 1 ? 1.0 : -1.0;
        }
        return xs;
    }
    xs.points.resize(draws, p + 1);
    xs.points.col(0).setOnes();
    xs.points.rightCols(p) = draw_regressors(x, draws, rng);
    xs.weights = Eigen::VectorXd::Constant(draws, 1.0 / draws);
    return xs;
}

RiskEstimate estimate_risk(const SimConfig& c) {
    c.validate();
    Theta truth;
    truth.beta = Eigen::VectorXd::Zero(c.x.p + 1);
    for (std::size_t i = 0; i < c.beta.size(); ++i) truth.beta(static_cast<Eigen::Index>(i)) = c.beta[i];
    truth.sigma = c.sigma;

    const auto reps = static_cast<std::size_t>(c.replications);
    std::vector<double> value(reps, 0.0);
    std::vector<char> ok(reps, 0);
    std::vector<long> div_fail(reps, 0);
    std::vector<char> fit_fail(reps, 0);

    parallel_for(reps, resolve_threads(c.threads), [&](std::size_t r) {
        const Sample s = simulate(c, r);
        MleResult fit;
        try {
            fit = mle_fit(s, c.model);
        } catch (const NumericError&) {
            fit.converged = false;
        }
        if (!fit.converged) {
            fit_fail[r] = 1;
            return;
        }
        // Separate stream for the inner x expectation.
        auto rng = replication_rng(c.seed ^ 0x9e3779b97f4a7c15ULL, r);
        const XSample xs = x_expectation_sample(c.x, fit.theta, truth, rng, c.x_draws);
        const DivergenceResult d = divergence(c.model, fit.theta, truth, c.alpha, xs);
        div_fail[r] = d.failures;
        if (std::isfinite(d.value)) {
            value[r] = d.value;
            ok[r] = 1;
        }
    });

    RiskEstimate e;
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        e.fit_failures += fit_fail[r];
        e.divergence_failures += div_fail[r];
        if (!ok[r]) continue;
        sum += value[r];
        ++e.replications_used;
    }
    if (e.replications_used == 0) throw NumericError("all replications failed");
    e.mean = sum / static_cast<double>(e.replications_used);
    if (e.replications_used >= 2) {
        double ss = 0.0;
        for (std::size_t r = 0; r < reps; ++r)
            if (ok[r]) ss += (value[r] - e.mean) * (value[r] - e.mean);
        const double n = static_cast<double>(e.replications_used);
        e.std_error = std::sqrt(ss / (n - 1) / n);
    }
    return e;
}

}  // namespace regrisk
