#include "regrisk/dataset.hpp"
#include "regrisk/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace regrisk;

#ifndef REGRISK_FIXTURES
#define REGRISK_FIXTURES "tests/fixtures"
#endif

namespace {

Eigen::MatrixXd random_matrix(long n, int p, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> g(2.0);
    Eigen::MatrixXd x(n, p);
    for (long t = 0; t < n; ++t)
        for (int i = 0; i < p; ++i) x(t, i) = g(rng) + 0.3 * (i > 0 ? x(t, i - 1) : 0.0);
    return x;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("toy csv") {
    const auto d = load_csv(REGRISK_FIXTURES "/toy.csv");
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.column_names == std::vector<std::string>{"x1", "x2"});
    CHECK(d.rows(2, 1) == 6.0);
    const auto s = standardize(d);
    const auto a = sample_aggregates(s);
    const auto b = sample_aggregates_bruteforce(s.scores);
    CHECK(rel(a.M2a, b.M2a) < 1e-12);
    CHECK(rel(a.M2b, b.M2b) < 1e-12);
    CHECK(rel(a.M1, b.M1) < 1e-12);
}

TEST_CASE("missing values") {
    const auto d = load_csv(REGRISK_FIXTURES "/missing.csv");
    CHECK(d.p() == 3);
    CHECK(d.n() == 9);
    CHECK(d.excluded.size() == 1);
    CsvOptions o;
    o.missing = MissingPolicy::DropRows;
    const auto r = load_csv(REGRISK_FIXTURES "/missing.csv", o);
    CHECK(r.p() == 4);
    CHECK(r.n() == 8);
    CHECK(r.dropped_rows == 1);
}

TEST_CASE("column selection") {
    std::istringstream in("id,a,b,c,label\n1,2,3,4,x\n2,5,1,0,y\n3,1,1,7,z\n4,0,2,2,w\n");
    CsvOptions o;
    o.range_first = "a";
    o.range_last = "c";
    o.drop_columns = {"b"};
    const auto d = parse_csv(in, o);
    CHECK(d.column_names == std::vector<std::string>{"a", "c"});

    std::istringstream in2("id,a,label\n1,2,x\n2,5,y\n");
    CHECK_THROWS_AS(parse_csv(in2), ConfigError);
    std::istringstream in3("id,a,label\n1,2,x\n2,5,y\n3,1,z\n4,4,w\n");
    CsvOptions skip;
    skip.drop_non_numeric = true;
    CHECK(parse_csv(in3, skip).column_names == std::vector<std::string>{"id", "a"});
}

TEST_CASE("malformed csv reports the line") {
    std::istringstream in("a,b\n1,2\n3\n");
    try {
        parse_csv(in);
        FAIL("expected error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream empty("a,b\n");
    CHECK_THROWS_AS(parse_csv(empty), ConfigError);
}

TEST_CASE("delimiter guessing and quotes") {
    std::istringstream in("\"a\";\"b\"\n1;2\n3;5\n4;4\n");
    const auto d = parse_csv(in);
    CHECK(d.column_names == std::vector<std::string>{"a", "b"});
    CHECK(d.rows(1, 1) == 5.0);
}

TEST_CASE("correlated columns") {
    std::ostringstream os;
    os << "u,v,w\n";
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    for (int t = 0; t < 200; ++t) {
        const double u = z(rng);
        os << u << ',' << u + 1e-3 * z(rng) << ',' << z(rng) << '\n';
    }
    std::istringstream in(os.str());
    const auto d = parse_csv(in);
    REQUIRE(d.flagged.size() == 1);
    CHECK(d.flagged[0].a == "u");
    CHECK(d.flagged[0].b == "v");
    CHECK(d.p() == 3);
    std::istringstream in2(os.str());
    CsvOptions o;
    o.drop_correlated = true;
    const auto e = parse_csv(in2, o);
    CHECK(e.column_names == std::vector<std::string>{"u", "w"});
}

TEST_CASE("whitening") {
    Eigen::MatrixXd x(500, 2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    for (int t = 0; t < 500; ++t) {
        const double a = z(rng);
        x(t, 0) = 3 + 2 * a;
        x(t, 1) = -1 + 0.9 * a + std::sqrt(1 - 0.81) * z(rng);
    }
    const auto s = standardize(x);
    const Eigen::VectorXd mean = s.scores.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd cov = s.scores.transpose() * s.scores / 500.0;
    CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(s.condition_number > 1);
    // Reconstruct the scores from the recorded transform.
    const Eigen::MatrixXd again = (x.rowwise() - s.center.transpose()) * s.transform;
    CHECK((again - s.scores).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("singular covariance") {
    Eigen::MatrixXd x(10, 2);
    for (int t = 0; t < 10; ++t) {
        x(t, 0) = t;
        x(t, 1) = 2 * t + 1;
    }
    try {
        standardize(x);
        FAIL("expected failure");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("singular covariance") != std::string::npos);
    }
}

TEST_CASE("aggregates equal brute force for p <= 5") {
    for (int p = 1; p <= 5; ++p) {
        const auto s = standardize(random_matrix(60 + 10 * p, p, 100 + p));
        const auto a = sample_aggregates(s);
        const auto b = sample_aggregates_bruteforce(s.scores);
        INFO("p = ", p);
        CHECK(rel(a.M2a, b.M2a) < 1e-12);
        CHECK(rel(a.M2b, b.M2b) < 1e-12);
        CHECK(rel(a.M1, b.M1) < 1e-12);
        CHECK(a.M2a >= 0);
        CHECK(a.M2b >= 0);
        CHECK(a.M1 >= 0);
    }
}

TEST_CASE("row permutation leaves the aggregates unchanged") {
    const Eigen::MatrixXd x = random_matrix(80, 4, 9);
    std::vector<int> order(80);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937(3));
    Eigen::MatrixXd y(80, 4);
    for (int t = 0; t < 80; ++t) y.row(t) = x.row(order[t]);
    const auto a = sample_aggregates(standardize(x));
    const auto b = sample_aggregates(standardize(y));
    CHECK(rel(a.M2a, b.M2a) < 1e-10);
    CHECK(rel(a.M2b, b.M2b) < 1e-10);
    CHECK(rel(a.M1, b.M1) < 1e-10);
}

TEST_CASE("aggregates of normal data are near the normal preset") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(40000, 3);
    for (long t = 0; t < x.rows(); ++t)
        for (int i = 0; i < 3; ++i) x(t, i) = z(rng);
    const auto a = sample_aggregates(standardize(x));
    CHECK(a.M1 == doctest::Approx(3 * 3 + 6 * 1).epsilon(0.03));
    CHECK(a.M2a < 0.01);
}
