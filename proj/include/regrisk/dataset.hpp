#pragma once

#include "regrisk/moments.hpp"

#include <Eigen/Dense>

#include <istream>
#include <string>
#include <vector>

namespace regrisk {

enum class MissingPolicy { DropColumns, DropRows };

struct CsvOptions {
    char delimiter = 0;  // 0: guess from the first line (',' ';' '\t')
    bool header = true;
    std::string missing_token = "?";
    MissingPolicy missing = MissingPolicy::DropColumns;
    std::vector<std::string> drop_columns;  // names, or 1-based positions
    // Optional inclusive column range by name or 1-based position.
    std::string range_first, range_last;
    bool drop_non_numeric = false;
    double correlation_threshold = 0.99;
    // Drop the later column of every flagged pair, in column order.
    bool drop_correlated = false;
};

struct CorrelatedPair {
    std::string a, b;
    double correlation = 0.0;
};

struct Dataset {
    std::vector<std::string> column_names;
    Eigen::MatrixXd rows;  // n x p
    std::vector<std::string> excluded;  // "name: reason"
    long dropped_rows = 0;
    std::vector<CorrelatedPair> flagged;

    long n() const { return static_cast<long>(rows.rows()); }
    int p() const { return static_cast<int>(rows.cols()); }
};

Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(std::istream& in, const CsvOptions& options = {});

// Pairs of columns whose absolute sample correlation exceeds threshold.
std::vector<CorrelatedPair> correlated_pairs(const Dataset& d, double threshold);

struct StandardizedMatrix {
    Eigen::MatrixXd scores;     // n x p, zero mean, identity second moment
    Eigen::MatrixXd transform;  // p x p: scores = (x - center) * transform
    Eigen::VectorXd center;
    double condition_number = 0.0;
};

// Centers, rotates to principal axes and scales each axis to unit variance
// (divisor n). Throws NumericError on a singular covariance.
StandardizedMatrix standardize(const Eigen::MatrixXd& x);
inline StandardizedMatrix standardize(const Dataset& d) { return standardize(d.rows); }

// M2a = sum_{ijk} m[i,j,k]^2, M2b = sum_k (sum_i m[i,i,k])^2,
// M1 = sum_{ik} m[i,i,k,k], with m the divisor-n sample moments of the scores.
AggregatedMoments<double> sample_aggregates(const Eigen::MatrixXd& scores);
inline AggregatedMoments<double> sample_aggregates(const StandardizedMatrix& s) {
    return sample_aggregates(s.scores);
}

// Direct enumeration over all index tuples; O(n p^4). For tests.
AggregatedMoments<double> sample_aggregates_bruteforce(const Eigen::MatrixXd& scores);

}  // namespace regrisk
