#include "regrisk/error.hpp"
#include "regrisk/mc_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace regrisk;

namespace {

SimConfig base(const char* error, const char* x, int p, long n) {
    SimConfig c;
    c.model = parse_error_model(error);
    c.x = parse_x_distribution(x, p);
    c.n = n;
    c.alpha = -1;
    c.threads = 1;
    return c;
}

Theta theta(std::initializer_list<double> b, double s) {
    Theta t;
    t.beta = Eigen::VectorXd(static_cast<Eigen::Index>(b.size()));
    int i = 0;
    for (double v : b) t.beta(i++) = v;
    t.sigma = s;
    return t;
}

}  // namespace

TEST_CASE("replication streams are reproducible") {
    auto a = replication_rng(7, 3), b = replication_rng(7, 3), c = replication_rng(7, 4);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    const auto cfg = base("t:3", "pareto:21/5", 3, 50);
    const auto s1 = simulate(cfg, 12), s2 = simulate(cfg, 12);
    CHECK(s1.X == s2.X);
    CHECK(s1.y == s2.y);
    CHECK((s1.X.col(0).array() == 1.0).all());
}

TEST_CASE("controlled regressors are signs") {
    auto rng = replication_rng(1, 0);
    const auto x = draw_regressors(parse_x_distribution("controlled", 4), 200, rng);
    CHECK((x.array().abs() == 1.0).all());
}

TEST_CASE("preset regressors are standardized") {
    for (const char* spec : {"normal", "t:21/5", "controlled", "pareto:21/5"}) {
        auto rng = replication_rng(2, 0);
        const auto x = draw_regressors(parse_x_distribution(spec, 1), 200000, rng);
        INFO(spec);
        CHECK(std::abs(x.col(0).mean()) < 0.02);
        CHECK(x.col(0).squaredNorm() / 200000 == doctest::Approx(1.0).epsilon(0.08));
    }
}

TEST_CASE("normal MLE is least squares") {
    auto cfg = base("normal", "normal", 3, 80);
    cfg.beta = {1, -2, 0.5, 3};
    cfg.sigma = 2;
    const auto s = simulate(cfg, 0);
    const auto fit = mle_fit(s, cfg.model);
    REQUIRE(fit.converged);
    const Eigen::VectorXd ols = s.X.colPivHouseholderQr().solve(s.y);
    CHECK((fit.theta.beta - ols).cwiseAbs().maxCoeff() < 1e-8);
    const double rss = (s.y - s.X * ols).squaredNorm();
    CHECK(fit.theta.sigma * fit.theta.sigma == doctest::Approx(rss / 80).epsilon(1e-8));
}

TEST_CASE("heavy-tailed MLE converges") {
    const auto cfg = base("t:3", "controlled", 2, 200);
    int ok = 0;
    for (int r = 0; r < 50; ++r) ok += mle_fit(simulate(cfg, r), cfg.model).converged;
    CHECK(ok == 50);
}

TEST_CASE("divergence of identical parameters is zero") {
    for (const char* e : {"normal", "t:3", "skew-normal:3"}) {
        const auto m = parse_error_model(e);
        for (double a : {-1.0, 0.0, 0.5, 1.0}) CHECK(std::abs(*divergence_at(m, 0, 1.3, 1.3, a)) < 1e-12);
    }
}

TEST_CASE("gaussian divergence has a closed form") {
    const auto m = ErrorModel::normal();
    const double d = 0.7, s1 = 1.2, s2 = 0.8;
    // KL(f1 || f2) with f1 = N(mu1, s1^2), f2 = N(mu2, s2^2)
    const double kl12 = std::log(s2 / s1) + (s1 * s1 + d * d) / (2 * s2 * s2) - 0.5;
    const double kl21 = std::log(s1 / s2) + (s2 * s2 + d * d) / (2 * s1 * s1) - 0.5;
    const double a1 = *divergence_at(m, d, s1, s2, -1), a2 = *divergence_at(m, d, s1, s2, 1);
    CHECK(std::abs(a1 - kl12) < 1e-8);
    CHECK(std::abs(a2 - kl21) < 1e-8);
    // alpha = 0: 4 (1 - Bhattacharyya coefficient)
    const double bc = std::sqrt(2 * s1 * s2 / (s1 * s1 + s2 * s2)) * std::exp(-d * d / (4 * (s1 * s1 + s2 * s2)));
    CHECK(std::abs(*divergence_at(m, d, s1, s2, 0) - 4 * (1 - bc)) < 1e-8);
}

TEST_CASE("alpha and -alpha swap the arguments") {
    const auto m = ErrorModel::skew_normal(3);
    for (double a : {-0.6, 0.3, 2.0}) {
        const double x = *divergence_at(m, 0.4, 1.1, 0.9, a);
        // Swapping the roles: the shift changes sign and the scales trade places.
        const double y = *divergence_at(m, -0.4, 0.9, 1.1, -a);
        CHECK(x == doctest::Approx(y).epsilon(1e-8));
    }
}

TEST_CASE("x expectation rules") {
    auto rng = replication_rng(3, 0);
    const auto t1 = theta({0, 1, 0}, 1), t2 = theta({0.1, 0.8, 0.2}, 1.1);
    const auto c = x_expectation_sample(parse_x_distribution("controlled", 2), t1, t2, rng);
    CHECK(c.points.rows() == 4);
    CHECK(c.weights.sum() == doctest::Approx(1.0));
    const auto g = x_expectation_sample(parse_x_distribution("normal", 2), t1, t2, rng);
    CHECK(g.weights.sum() == doctest::Approx(1.0));
    // Normal regressors: E over x of the Gaussian KL has a closed form.
    const Eigen::Vector2d db(-0.2, -0.2);
    const double s1 = 1, s2 = 1.1;
    const double expect = std::log(s2 / s1) + (s1 * s1 + 0.01 + db.squaredNorm()) / (2 * s2 * s2) - 0.5;
    const auto dv = divergence(ErrorModel::normal(), t1, t2, -1, g);
    CHECK(dv.failures == 0);
    CHECK(std::abs(dv.value - expect) < 1e-8);
}

TEST_CASE("single replication has no standard error") {
    auto cfg = base("normal", "normal", 1, 30);
    cfg.replications = 1;
    const auto r = estimate_risk(cfg);
    CHECK_FALSE(r.std_error);
    CHECK(r.replications_used == 1);
}

TEST_CASE("small risk estimate is deterministic and near the expansion") {
    auto cfg = base("normal", "normal", 1, 100);
    cfg.replications = 400;
    cfg.seed = 42;
    const auto a = estimate_risk(cfg);
    cfg.threads = 2;
    const auto b = estimate_risk(cfg);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
    REQUIRE(a.std_error);
    // 3/(2n) leading term; the 1/n^2 term is small at n = 100.
    CHECK(std::abs(a.mean - 0.015) < 5 * *a.std_error + 0.002);
}

TEST_CASE("configuration checks") {
    auto cfg = base("normal", "normal", 2, 3);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.n = 50;
    cfg.beta = {1, 2};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.beta.clear();
    cfg.sigma = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
