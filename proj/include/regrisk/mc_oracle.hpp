#pragma once

#include "regrisk/error_model.hpp"
#include "regrisk/moments.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace regrisk {

struct SimConfig {
    ErrorModel model = ErrorModel::normal();
    XDistribution x;            // preset and dimension p
    std::vector<double> beta;   // p + 1 entries (intercept first); empty means zeros
    double sigma = 1.0;
    long n = 100;
    long replications = 1000;
    double alpha = -1.0;
    std::uint64_t seed = 1;
    int x_draws = 10000;        // inner x draws when no exact rule applies
    int threads = 0;            // 0: REGRISK_THREADS or 1

    void validate() const;
};

struct Sample {
    Eigen::MatrixXd X;  // n x (p+1), first column all ones
    Eigen::VectorXd y;
};

// Random stream of one replication; depends only on (seed, replication).
std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t replication);

// Regressors drawn from the preset and standardized by its theoretical mean
// and standard deviation (no intercept column).
Eigen::MatrixXd draw_regressors(const XDistribution& x, long n, std::mt19937_64& rng);

Sample simulate(const SimConfig& config, std::uint64_t replication = 0);

struct Theta {
    Eigen::VectorXd beta;
    double sigma = 1.0;
};

struct MleResult {
    Theta theta;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;  // sup-norm of the mean log-likelihood gradient
};

// Quasi-Newton (BFGS) ascent of the log-likelihood over (beta, log sigma)
// with the analytic score. Default start: OLS and the residual RMS.
MleResult mle_fit(const Sample& sample, const ErrorModel& model, const std::optional<Theta>& init = std::nullopt,
                  int max_iterations = 500, double grad_tol = 1e-8);

// Weighted regressor points (each row includes the leading 1) approximating
// the expectation over the regressor distribution.
struct XSample {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;  // sums to 1
};

// Normal regressors: Gauss-Hermite along the direction of beta1 - beta2 (the
// divergence depends on x only through that projection). Controlled: all 2^p
// sign patterns for p <= 16. Otherwise `draws` fresh draws.
XSample x_expectation_sample(const XDistribution& x, const Theta& t1, const Theta& t2, std::mt19937_64& rng,
                             int draws = 10000);

struct DivergenceResult {
    double value = 0.0;
    long failures = 0;  // x points whose y-integral did not converge
};

// Alpha-divergence between the conditional densities at theta1 and theta2,
// averaged over the x sample.
DivergenceResult divergence(const ErrorModel& model, const Theta& t1, const Theta& t2, double alpha,
                            const XSample& xs);

// The y-integral for one x: location shift mu1 - mu2 and scales s1, s2.
std::optional<double> divergence_at(const ErrorModel& model, double mu_diff, double s1, double s2, double alpha);

struct RiskEstimate {
    double mean = 0.0;
    std::optional<double> std_error;  // empty with fewer than two replications
    long replications_used = 0;
    long fit_failures = 0;
    long divergence_failures = 0;
};

RiskEstimate estimate_risk(const SimConfig& config);

}  // namespace regrisk
