#include "regrisk/dataset.hpp"

#include "regrisk/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace regrisk {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim, long lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ConfigError("malformed CSV: unterminated quote at line " + std::to_string(lineno));
    out.push_back(trim(cur));
    return out;
}

char guess_delimiter(const std::string& line) {
    std::size_t best = 0;
    char d = ',';
    for (char c : {',', ';', '\t'}) {
        const auto n = static_cast<std::size_t>(std::count(line.begin(), line.end(), c));
        if (n > best) {
            best = n;
            d = c;
        }
    }
    return d;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) return std::nullopt;
    return v;
}

int resolve_column(const std::vector<std::string>& names, const std::string& ref) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == ref) return static_cast<int>(i);
    if (auto v = parse_number(ref); v && *v == std::floor(*v) && *v >= 1 && *v <= names.size())
        return static_cast<int>(*v) - 1;
    throw ConfigError("unknown column '" + ref + "'");
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    return parse_csv(in, options);
}

Dataset parse_csv(std::istream& in, const CsvOptions& opt) {
    std::vector<std::vector<std::string>> cells;
    std::vector<long> line_of;
    std::vector<std::string> names;
    std::string line;
    long lineno = 0;
    char delim = opt.delimiter;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (!delim) delim = guess_delimiter(line);
        auto fields = split_line(line, delim, lineno);
        if (names.empty() && opt.header) {
            names = std::move(fields);
            continue;
        }
        if (names.empty()) {
            for (std::size_t i = 0; i < fields.size(); ++i) names.push_back("x" + std::to_string(i + 1));
        }
        if (fields.size() != names.size())
            throw ConfigError("malformed CSV: line " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(names.size()));
        cells.push_back(std::move(fields));
        line_of.push_back(lineno);
    }
    if (names.empty()) throw ConfigError("empty CSV input");

    Dataset d;
    const int total = static_cast<int>(names.size());
    std::vector<bool> keep(total, true);
    if (!opt.range_first.empty() || !opt.range_last.empty()) {
        const int lo = opt.range_first.empty() ? 0 : resolve_column(names, opt.range_first);
        const int hi = opt.range_last.empty() ? total - 1 : resolve_column(names, opt.range_last);
        if (lo > hi) throw ConfigError("column range is empty");
        for (int c = 0; c < total; ++c)
            if (c < lo || c > hi) keep[c] = false;
    }
    for (const auto& ref : opt.drop_columns) {
        const int c = resolve_column(names, ref);
        if (keep[c]) d.excluded.push_back(names[c] + ": dropped by request");
        keep[c] = false;
    }

    // Column-level scan: missing tokens and non-numeric entries.
    std::vector<bool> row_missing(cells.size(), false);
    for (int c = 0; c < total; ++c) {
        if (!keep[c]) continue;
        long missing = 0;
        for (std::size_t r = 0; r < cells.size(); ++r) {
            const std::string& v = cells[r][c];
            if (v == opt.missing_token || v.empty()) {
                ++missing;
                row_missing[r] = true;
                continue;
            }
            if (!parse_number(v)) {
                if (opt.drop_non_numeric) {
                    keep[c] = false;
                    d.excluded.push_back(names[c] + ": non-numeric");
                    break;
                }
                throw ConfigError("malformed CSV: non-numeric value '" + v + "' in column '" + names[c] +
                                  "' at line " + std::to_string(line_of[r]));
            }
        }
        if (keep[c] && missing > 0 && opt.missing == MissingPolicy::DropColumns) {
            keep[c] = false;
            d.excluded.push_back(names[c] + ": " + std::to_string(missing) + " missing values");
        }
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        bool bad = false;
        if (opt.missing == MissingPolicy::DropRows) {
            for (int c = 0; c < total && !bad; ++c)
                bad = keep[c] && (cells[r][c] == opt.missing_token || cells[r][c].empty());
        }
        if (bad) ++d.dropped_rows;
        else rows.push_back(r);
    }
    std::vector<int> cols;
    for (int c = 0; c < total; ++c)
        if (keep[c]) cols.push_back(c);
    if (cols.empty() || rows.empty()) throw ConfigError("no data left after cleaning");

    d.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            d.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *parse_number(cells[rows[r]][cols[c]]);
    for (int c : cols) d.column_names.push_back(names[c]);

    d.flagged = correlated_pairs(d, opt.correlation_threshold);
    if (opt.drop_correlated && !d.flagged.empty()) {
        std::set<std::string> gone;
        for (const auto& pr : d.flagged) {
            if (gone.count(pr.a) || gone.count(pr.b)) continue;
            gone.insert(pr.b);
            d.excluded.push_back(pr.b + ": correlation " + std::to_string(pr.correlation) + " with " + pr.a);
        }
        std::vector<Eigen::Index> kept;
        std::vector<std::string> kept_names;
        for (std::size_t c = 0; c < d.column_names.size(); ++c)
            if (!gone.count(d.column_names[c])) {
                kept.push_back(static_cast<Eigen::Index>(c));
                kept_names.push_back(d.column_names[c]);
            }
        Eigen::MatrixXd reduced(d.rows.rows(), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t c = 0; c < kept.size(); ++c) reduced.col(static_cast<Eigen::Index>(c)) = d.rows.col(kept[c]);
        d.rows = std::move(reduced);
        d.column_names = std::move(kept_names);
    }
    if (d.n() <= d.p())
        throw ConfigError("need more rows than columns after cleaning (n=" + std::to_string(d.n()) +
                          ", p=" + std::to_string(d.p()) + ")");
    return d;
}

std::vector<CorrelatedPair> correlated_pairs(const Dataset& d, double threshold) {
    std::vector<CorrelatedPair> out;
    const Eigen::MatrixXd c = d.rows.rowwise() - d.rows.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c;
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        for (Eigen::Index j = i + 1; j < cov.cols(); ++j) {
            const double denom = std::sqrt(cov(i, i) * cov(j, j));
            if (denom == 0) continue;
            const double r = cov(i, j) / denom;
            if (std::abs(r) > threshold)
                out.push_back({d.column_names[static_cast<std::size_t>(i)], d.column_names[static_cast<std::size_t>(j)], r});
        }
    return out;
}

StandardizedMatrix standardize(const Eigen::MatrixXd& x) {
    const double n = static_cast<double>(x.rows());
    if (x.rows() <= x.cols()) throw ConfigError("standardization needs more rows than columns");
    StandardizedMatrix s;
    s.center = x.colwise().mean().transpose();
    const Eigen::MatrixXd c = x.rowwise() - s.center.transpose();
    const Eigen::MatrixXd cov = (c.transpose() * c) / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("eigen-decomposition of the covariance failed");
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double top = lambda.maxCoeff();
    std::ostringstream nulls;
    int null_count = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > 1e-12 * top && lambda(i) > 0) continue;
        ++null_count;
        nulls << " [";
        for (Eigen::Index j = 0; j < lambda.size(); ++j) nulls << (j ? " " : "") << eig.eigenvectors()(j, i);
        nulls << "]";
    }
    if (null_count > 0)
        throw NumericError("singular covariance: " + std::to_string(null_count) + " null direction(s):" + nulls.str());
    s.condition_number = top / lambda.minCoeff();
    s.transform = eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
    s.scores = c * s.transform;
    return s;
}

AggregatedMoments<double> sample_aggregates(const Eigen::MatrixXd& x) {
    const double n = static_cast<double>(x.rows());
    const Eigen::Index p = x.cols();
    AggregatedMoments<double> m;
    // Slice i of the third-moment tensor: X' diag(x_i) X / n.
    for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::MatrixXd weighted = x.array().colwise() * x.col(i).array();
        const Eigen::MatrixXd slice = (x.transpose() * weighted) / n;
        m.M2a += slice.squaredNorm();
    }
    const Eigen::VectorXd r2 = x.rowwise().squaredNorm();
    const Eigen::VectorXd v = (x.transpose() * r2) / n;  // sum_i m[i,i,k]
    m.M2b = v.squaredNorm();
    m.M1 = r2.squaredNorm() / n;
    return m;
}

AggregatedMoments<double> sample_aggregates_bruteforce(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows(), p = x.cols();
    auto m3 = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) s += x(t, i) * x(t, j) * x(t, k);
        return s / static_cast<double>(n);
    };
    auto m4 = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) s += x(t, i) * x(t, j) * x(t, k) * x(t, l);
        return s / static_cast<double>(n);
    };
    AggregatedMoments<double> m;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index k = 0; k < p; ++k) {
                const double a = m3(i, j, k);
                m.M2a += a * a;
                m.M2b += m3(i, i, k) * m3(j, j, k);
            }
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index k = 0; k < p; ++k) m.M1 += m4(i, i, k, k);
    return m;
}

}  // namespace regrisk
