#pragma once

#include "regrisk/risk.hpp"

#include <optional>
#include <string>
#include <vector>

namespace regrisk {

// M = 1/m + 1/(1-m)
double binomial_M(double m);

// Risk expansion of the MLE of a binomial success probability m, k trials.
double binomial_risk(double m, double alpha, double n);
// Same, parameterized directly by M.
double binomial_risk_M(double M, double alpha, double n);

struct IdeResult {
    std::optional<double> m;       // root >= 1/2; empty means no real root ("*")
    std::optional<double> m_other;  // 1 - m
    double M = 0.0;                 // solved value of 1/m + 1/(1-m)

    std::string render(int digits = 2) const;
};

// Binomial success probability whose B(k, m) estimation is as hard as the
// regression model with n = (p+2)k. Independent of k.
IdeResult ide(const RiskExpansion& r, double alpha);

// Direct root search of the defining equation at a fixed k (no elimination);
// used to check the k-independence of ide().
IdeResult ide_at_k(const RiskExpansion& r, double alpha, double k);

struct RssResult {
    long n = 0;
    int k = 0;
    double n_exact = 0.0;
    double n_other_root = 0.0;
};

// Regression sample size as hard as a k-times fair coin toss; k starts at
// k_start and grows by k_step until the solution is in the validity region.
RssResult rss(const RiskExpansion& r, double alpha, int k_start = 10, int k_step = 10, int k_max = 1000);

// Solution of the R.S.S. equation at one fixed k (empty when no real root).
std::optional<double> rss_at_k(const RiskExpansion& r, double alpha, int k);

struct CoinResult {
    long n = 0;
    double n_exact = 0.0;
};

// Fair-coin sample size whose risk equals the regression risk at n_actual.
CoinResult coin_equivalent(const RiskExpansion& r, double alpha, long n_actual);

// Nearest integer, ties away from zero.
long round_half_away(double x);

}  // namespace regrisk
