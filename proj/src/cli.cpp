#include "regrisk/cli.hpp"

#include "regrisk/benchmarks.hpp"
#include "regrisk/dataset.hpp"
#include "regrisk/error.hpp"
#include "regrisk/mc_oracle.hpp"
#include "regrisk/risk.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace regrisk::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared option groups

struct CsvFlags {
    std::string delimiter;
    bool no_header = false;
    std::string missing_token = "?";
    bool drop_rows = false;
    std::vector<std::string> drop_columns;
    std::string columns;  // "first:last"
    bool drop_non_numeric = false;
    bool drop_correlated = false;
    double corr_threshold = 0.99;

    void add(CLI::App* app) {
        app->add_option("--delimiter", delimiter, "Field separator (default: guessed)");
        app->add_flag("--no-header", no_header, "First line is data");
        app->add_option("--missing-token,--missing", missing_token, "Marker for missing values");
        app->add_flag("--drop-rows", drop_rows, "Drop rows with missing values instead of columns");
        app->add_option("--drop-column,--drop", drop_columns, "Column name or 1-based position to exclude");
        app->add_option("--columns", columns, "Inclusive column range first:last (names or positions)");
        app->add_flag("--drop-non-numeric", drop_non_numeric, "Skip non-numeric columns instead of failing");
        app->add_flag("--drop-correlated", drop_correlated, "Drop the later column of each flagged pair");
        app->add_option("--corr-threshold,--threshold", corr_threshold, "Absolute correlation flagged as collinear");
    }

    CsvOptions options() const {
        CsvOptions o;
        if (!delimiter.empty()) {
            if (delimiter == "\\t" || delimiter == "tab") o.delimiter = '\t';
            else if (delimiter.size() == 1) o.delimiter = delimiter[0];
            else throw ConfigError("delimiter must be a single character: '" + delimiter + "'");
        }
        o.header = !no_header;
        o.missing_token = missing_token;
        o.missing = drop_rows ? MissingPolicy::DropRows : MissingPolicy::DropColumns;
        o.drop_columns = drop_columns;
        if (!columns.empty()) {
            const auto colon = columns.find(':');
            if (colon == std::string::npos) throw ConfigError("--columns expects first:last, got '" + columns + "'");
            o.range_first = columns.substr(0, colon);
            o.range_last = columns.substr(colon + 1);
        }
        o.drop_non_numeric = drop_non_numeric;
        o.drop_correlated = drop_correlated;
        o.correlation_threshold = corr_threshold;
        return o;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<Rational> parse_values(const std::string& s, std::size_t expected, const std::string& what) {
    const auto parts = split_list(s);
    if (parts.size() != expected)
        throw ConfigError(what + " expects " + std::to_string(expected) + " comma-separated values, got '" + s +
                          "'");
    std::vector<Rational> v;
    for (const auto& t : parts) v.push_back(parse_rational(t));
    return v;
}

json rational_json(const Rational& r) { return to_string(r); }

// Moments from exactly one of the supported sources.
struct MomentSource {
    std::string xpreset, homogeneous, aggregated, csv, moments_json;
    int p = 0;
    CsvFlags csv_flags;

    void add(CLI::App* app, bool with_csv = true) {
        auto* g = app->add_option_group("moments", "Moment source (exactly one)");
        g->add_option("--xpreset", xpreset, "normal | t:<nu> | controlled | pareto:<b>");
        g->add_option("--homogeneous", homogeneous, "m4,m22,m3,m21,m111");
        g->add_option("--aggregated", aggregated, "M2a,M2b,M1");
        g->add_option("--moments-json", moments_json, "JSON file with \"p\" and \"moments\" (as emitted by risk)");
        if (with_csv) {
            g->add_option("--csv", csv, "Regressor CSV (standardized internally)");
            csv_flags.add(app);
        }
        g->require_option(1);
        app->add_option("--p", p, "Number of regressors (not needed for --csv / --moments-json)");
    }

    struct Result {
        std::optional<MomentSummary<Rational>> exact;
        MomentSummary<double> approx;
        json info;
    };

    int require_p() const {
        if (p < 1) throw ConfigError("--p is required and must be at least 1");
        return p;
    }

    Result resolve() const {
        Result r;
        if (!xpreset.empty()) {
            const XDistribution x = parse_x_distribution(xpreset, require_p());
            r.exact = MomentSummary<Rational>{x.p, preset_aggregates(x)};
            r.info = {{"source", "preset"}, {"preset", x.describe()}};
        } else if (!homogeneous.empty()) {
            const auto v = parse_values(homogeneous, 5, "--homogeneous");
            r.exact = MomentSummary<Rational>{require_p(), HomogeneousMoments<Rational>{v[0], v[1], v[2], v[3], v[4]}};
            r.info = {{"source", "homogeneous"}};
        } else if (!aggregated.empty()) {
            const auto v = parse_values(aggregated, 3, "--aggregated");
            r.exact = MomentSummary<Rational>{require_p(), AggregatedMoments<Rational>{v[0], v[1], v[2]}};
            r.info = {{"source", "aggregated"}};
        } else if (!moments_json.empty()) {
            std::ifstream in(moments_json);
            if (!in) throw ConfigError("cannot open " + moments_json);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ConfigError("invalid JSON in " + moments_json + ": " + e.what());
            }
            // Either {"p", "moments": {...}} (risk output) or flat (moments output).
            if (!j.contains("p")) throw ConfigError(moments_json + ": needs \"p\"");
            const json src = j.contains("moments") ? j["moments"] : j;
            for (const char* key : {"M2a", "M2b", "M1"})
                if (!src.contains(key)) throw ConfigError(moments_json + ": missing \"" + key + "\"");
            auto get = [&](const char* key) -> Rational {
                const auto& v = src.at(key);
                if (v.is_string()) return parse_rational(v.get<std::string>());
                // Decimal expansion of the double, so the value round-trips bit-exactly.
                std::ostringstream os;
                os << std::setprecision(17) << v.get<double>();
                return parse_rational(os.str());
            };
            const bool numeric = !src.at("M1").is_string();
            AggregatedMoments<Rational> a{get("M2a"), get("M2b"), get("M1")};
            const int pp = j["p"].get<int>();
            if (numeric) {
                r.approx = MomentSummary<double>{
                    pp, AggregatedMoments<double>{to_double(a.M2a), to_double(a.M2b), to_double(a.M1)}};
                r.info = {{"source", "moments-json"}};
                validate(r.approx);
                return r;
            }
            r.exact = MomentSummary<Rational>{pp, a};
            r.info = {{"source", "moments-json"}};
        } else {
            const Dataset d = load_csv(csv, csv_flags.options());
            const StandardizedMatrix s = standardize(d);
            r.approx = MomentSummary<double>{d.p(), sample_aggregates(s)};
            r.info = {{"source", "csv"}, {"n", d.n()}, {"condition_number", s.condition_number}};
            r.info["excluded"] = d.excluded;
            json flagged = json::array();
            for (const auto& f : d.flagged) flagged.push_back({{"a", f.a}, {"b", f.b}, {"correlation", f.correlation}});
            r.info["flagged"] = flagged;
            validate(r.approx);
            return r;
        }
        validate(*r.exact);
        r.approx = to_double(*r.exact);
        return r;
    }
};

json aggregates_json(const MomentSource::Result& m) {
    if (m.exact) {
        const auto a = to_aggregated(*m.exact);
        return {{"M2a", rational_json(a.M2a)}, {"M2b", rational_json(a.M2b)}, {"M1", rational_json(a.M1)}};
    }
    const auto a = to_aggregated(m.approx);
    return {{"M2a", a.M2a}, {"M2b", a.M2b}, {"M1", a.M1}};
}

struct ModelFlags {
    std::string error = "normal";
    double tol = 1e-10;
    int threads = 0;

    void add(CLI::App* app) {
        app->add_option("--error", error, "normal | t:<nu> | skew-normal:<b> | custom:<file>");
        app->add_option("--tol", tol, "Quadrature tolerance for the eta table");
        app->add_option("--threads", threads, "Worker threads (default: REGRISK_THREADS or 1)");
    }
};

RiskReport risk_report(const ModelFlags& mf, const MomentSource::Result& m) {
    const ErrorModel model = parse_error_model(mf.error);
    const EtaTable table = build_eta_table(model, mf.tol, mf.threads);
    return m.exact ? compute_risk(table, *m.exact) : compute_risk(table, m.approx);
}

json expansion_json(const RiskReport& r) {
    const auto& e = r.expansion;
    json j = {{"p", e.p},
              {"main", e.main},
              {"q", {e.qa, e.qb, e.qc}},
              {"validity_n_min", e.validity_n_min},
              {"coeff_error", {r.coeff_error[0], r.coeff_error[1], r.coeff_error[2]}}};
    const auto& f = r.full_dimension_variant;
    j["q_full_dimension_variant"] = {f.qa, f.qb, f.qc};
    if (r.exact) {
        j["exact"] = {{"main", to_string(r.exact->main)},
                      {"q", {to_string(r.exact->qa), to_string(r.exact->qb), to_string(r.exact->qc)}}};
    }
    return j;
}

double parse_alpha(const std::string& s) { return to_double(parse_rational(s)); }

std::string render_rss(const RssResult& r) { return std::to_string(r.n) + "(" + std::to_string(r.k) + ")"; }

// ---------------------------------------------------------------------------
// Tables

struct TableRow {
    std::string label;
    std::string error;
    MomentSummary<Rational> moments;
};

struct TableSpec {
    std::string title;
    std::vector<TableRow> rows;
    std::optional<long> n_actual;
};

TableSpec table_spec(const std::string& name) {
    TableSpec t;
    auto preset_rows = [&](const std::string& error) {
        for (const char* x : {"normal", "t:21/5", "controlled", "pareto:21/5"}) {
            const XDistribution xd = parse_x_distribution(x, 10);
            t.rows.push_back({xd.describe(), error, {10, preset_aggregates(xd)}});
        }
    };
    auto data_rows = [&](int p, const char* a, const char* b, const char* c) {
        const AggregatedMoments<Rational> m{parse_rational(a), parse_rational(b), parse_rational(c)};
        for (const char* e : {"normal", "t:3", "skew-normal:3"}) t.rows.push_back({e, e, {p, m}});
    };
    if (name == "table1") {
        t.title = "I.D.E. and R.S.S., normal error, p=10";
        preset_rows("normal");
    } else if (name == "table2") {
        t.title = "I.D.E. and R.S.S., t(3) error, p=10";
        preset_rows("t:3");
    } else if (name == "table3") {
        t.title = "I.D.E. and R.S.S., skew-normal(3) error, p=10";
        preset_rows("skew-normal:3");
    } else if (name == "table4") {
        t.title = "I.D.E. and R.S.S., wine quality aggregates, p=11";
        data_rows(11, "0.000326899", "0.000230836", "0.116967");
        t.n_actual = 4898;
    } else if (name == "table5") {
        t.title = "I.D.E. and R.S.S., communities and crime aggregates, p=99";
        data_rows(99, "1708.97", "1749.28", "2604.5");
        t.n_actual = 2215;
    } else {
        throw ConfigError("unknown table preset '" + name + "' (expected table1..table5)");
    }
    return t;
}

// ---------------------------------------------------------------------------

void emit(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-sample risk of regression MLEs under alpha-divergence", "regrisk"};
    app.require_subcommand(1);

    // risk
    auto* risk = app.add_subcommand("risk", "Second-order risk expansion");
    ModelFlags risk_model;
    MomentSource risk_moments;
    std::string risk_alpha;
    long risk_n = 0;
    risk_model.add(risk);
    risk_moments.add(risk);
    risk->add_option("--alpha", risk_alpha, "Divergence parameter (rational allowed)");
    risk->add_option("--n", risk_n, "Sample size at which to evaluate the expansion");

    // ide / rss / coin-equiv
    auto* ide_cmd = app.add_subcommand("ide", "Indicator of the difficulty of estimation");
    auto* rss_cmd = app.add_subcommand("rss", "Required sample size against a k-times fair coin");
    auto* coin_cmd = app.add_subcommand("coin-equiv", "Fair-coin sample size equivalent to a regression sample");
    ModelFlags ind_model;
    MomentSource ind_moments;
    std::string ind_alpha = "-1";
    long n_actual = 0;
    int k_start = 10, k_step = 10;
    for (auto* c : {ide_cmd, rss_cmd, coin_cmd}) {
        ind_model.add(c);
        ind_moments.add(c);
        c->add_option("--alpha", ind_alpha, "Divergence parameter");
    }
    rss_cmd->add_option("--k-start", k_start, "First coin-toss benchmark size");
    rss_cmd->add_option("--k-step", k_step, "Benchmark escalation step");
    coin_cmd->add_option("--n-actual", n_actual, "Regression sample size")->required();

    // moments
    auto* moments_cmd = app.add_subcommand("moments", "Aggregated sample moments of a regressor CSV");
    std::string moments_path;
    CsvFlags moments_csv;
    bool moments_bruteforce = false;
    moments_cmd->add_option("file", moments_path, "CSV file")->required();
    moments_csv.add(moments_cmd);
    moments_cmd->add_flag("--bruteforce", moments_bruteforce, "Also report the O(n p^4) enumeration");

    // eta
    auto* eta_cmd = app.add_subcommand("eta", "Dump the eta table of an error model");
    ModelFlags eta_model;
    std::string eta_method = "auto", eta_format = "json", eta_action = "dump";
    bool eta_invariants = false;
    eta_cmd->add_option("action", eta_action, "dump")->check(CLI::IsMember({"dump"}));
    eta_model.add(eta_cmd);
    eta_cmd->add_flag("--invariants", eta_invariants, "Wrap the entries and add the invariant checks");
    eta_cmd->add_option("--method", eta_method, "auto | quadrature")->check(CLI::IsMember({"auto", "quadrature"}));
    eta_cmd->add_option("--format", eta_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

    // validate
    auto* val_cmd = app.add_subcommand("validate", "Monte-Carlo check of the expansion");
    SimConfig sim;
    std::string val_error = "normal", val_x = "normal", val_alpha = "-1";
    std::vector<double> val_beta;
    int val_p = 1;
    val_cmd->add_option("--error", val_error, "normal | t:<nu> | skew-normal:<b>");
    val_cmd->add_option("--xdist", val_x, "normal | t:<nu> | controlled | pareto:<b>");
    val_cmd->add_option("--p", val_p, "Number of regressors");
    val_cmd->add_option("--n", sim.n, "Sample size");
    val_cmd->add_option("--alpha", val_alpha, "Divergence parameter");
    val_cmd->add_option("--reps", sim.replications, "Replications");
    val_cmd->add_option("--seed", sim.seed, "Random seed");
    val_cmd->add_option("--beta", val_beta, "True coefficients (p + 1 values; default zero)")->delimiter(',');
    val_cmd->add_option("--sigma", sim.sigma, "True scale");
    val_cmd->add_option("--x-draws", sim.x_draws, "Regressor draws for the inner expectation");
    val_cmd->add_option("--threads", sim.threads, "Worker threads");

    // series
    auto* series_cmd = app.add_subcommand("series", "Plot data: ED against k with the coin-toss benchmark");
    ModelFlags series_model;
    MomentSource series_moments;
    std::string series_alpha = "-1";
    int k_min = 5, k_max = 200, k_inc = 1, n_per_k = 0;
    series_model.add(series_cmd);
    series_moments.add(series_cmd);
    series_cmd->add_option("--alpha", series_alpha, "Divergence parameter");
    series_cmd->add_option("--k-min", k_min, "First k");
    series_cmd->add_option("--k-max", k_max, "Last k");
    series_cmd->add_option("--k-step", k_inc, "Step in k");
    series_cmd->add_option("--n-per-k", n_per_k, "Regression n per unit k (default p + 2)");

    // table
    auto* table_cmd = app.add_subcommand("table", "Regenerate an indicator table");
    std::string table_name, table_format = "json";
    int table_threads = 0;
    table_cmd->add_option("--preset", table_name, "table1 .. table5")->required();
    table_cmd->add_option("--format", table_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    table_cmd->add_option("--threads", table_threads, "Worker threads");

    auto diagnostic = [&](const char* kind, const std::string& msg) {
        err << json{{"error", kind}, {"message", msg}}.dump() << "\n";
    };

    try {
        std::vector<std::string> args(args_in.rbegin(), args_in.rend());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        diagnostic("config", e.what());
        return 2;
    }

    try {
        if (risk->parsed()) {
            const auto m = risk_moments.resolve();
            const RiskReport r = risk_report(risk_model, m);
            json j = expansion_json(r);
            j["error_model"] = risk_model.error;
            j["moments"] = aggregates_json(m);
            j["moment_source"] = m.info;
            if (!risk_alpha.empty()) {
                const double a = parse_alpha(risk_alpha);
                j["alpha"] = a;
                j["q_alpha"] = r.expansion.q(a);
                if (risk_n > 0) {
                    const RiskValue v = evaluate_risk(r.expansion, a, risk_n);
                    j["ed"] = {{"n", risk_n}, {"value", v.value}, {"below_validity", v.below_validity}};
                    if (r.exact) {
                        const Rational ar = parse_rational(risk_alpha);
                        const Rational n = risk_n;
                        j["ed"]["exact"] = to_string(r.exact->main / n + r.exact->q(ar) / (n * n));
                    }
                }
            } else if (risk_n > 0) {
                throw ConfigError("--n needs --alpha");
            }
            emit(out, j);
        } else if (ide_cmd->parsed() || rss_cmd->parsed() || coin_cmd->parsed()) {
            const auto m = ind_moments.resolve();
            const RiskReport r = risk_report(ind_model, m);
            const double a = parse_alpha(ind_alpha);
            json j = {{"alpha", a}, {"p", r.expansion.p}};
            if (ide_cmd->parsed()) {
                const IdeResult res = ide(r.expansion, a);
                j["ide"] = res.m ? json(*res.m) : json("*");
                j["ide_rendered"] = res.render();
                j["m_other"] = res.m_other ? json(*res.m_other) : json(nullptr);
                j["M"] = res.M;
            } else if (rss_cmd->parsed()) {
                const RssResult res = rss(r.expansion, a, k_start, k_step);
                j["rss"] = {{"n", res.n}, {"k", res.k}};
                j["n_exact"] = res.n_exact;
                j["n_other_root"] = res.n_other_root;
                j["rendered"] = render_rss(res);
            } else {
                const CoinResult res = coin_equivalent(r.expansion, a, n_actual);
                j["n_actual"] = n_actual;
                j["n"] = res.n;
                j["n_exact"] = res.n_exact;
            }
            emit(out, j);
        } else if (moments_cmd->parsed()) {
            const Dataset d = load_csv(moments_path, moments_csv.options());
            const StandardizedMatrix s = standardize(d);
            const auto a = sample_aggregates(s);
            json j = {{"n", d.n()},
                      {"p", d.p()},
                      {"M2a", a.M2a},
                      {"M2b", a.M2b},
                      {"M1", a.M1},
                      {"condition_number", s.condition_number},
                      {"columns", d.column_names},
                      {"excluded", d.excluded},
                      {"dropped_rows", d.dropped_rows}};
            json flagged = json::array();
            for (const auto& f : d.flagged) flagged.push_back({{"a", f.a}, {"b", f.b}, {"correlation", f.correlation}});
            j["flagged"] = flagged;
            if (moments_bruteforce) {
                const auto b = sample_aggregates_bruteforce(s.scores);
                j["bruteforce"] = {{"M2a", b.M2a}, {"M2b", b.M2b}, {"M1", b.M1}};
            }
            emit(out, j);
        } else if (eta_cmd->parsed()) {
            const ErrorModel model = parse_error_model(eta_model.error);
            const EtaTable t = eta_method == "auto" ? build_eta_table(model, eta_model.tol, eta_model.threads)
                                                    : build_eta_table_by_quadrature(model, eta_model.tol,
                                                                                    eta_model.threads);
            if (eta_format == "csv") {
                out << "i,j,k,l,value,abs_error_bound,method,exact\n";
                out << std::setprecision(17);
                for (const auto& x : EtaTable::grid()) {
                    out << x.i << ',' << x.j << ',' << x.k << ',' << x.l << ',';
                    if (!t.available(x)) {
                        out << ",,divergent,\n";
                        continue;
                    }
                    const auto& e = t.entry(x);
                    out << e.value << ',' << e.abs_error_bound << ',' << to_string(e.method) << ',';
                    if (t.exact()) out << to_string(t.exact_value(x));
                    out << '\n';
                }
            } else {
                json j = json::object();
                for (const auto& x : EtaTable::grid()) {
                    json e;
                    if (!t.available(x)) {
                        e["divergent"] = t.divergence_reason(x);
                    } else {
                        const auto& v = t.entry(x);
                        e["value"] = v.value;
                        e["err"] = v.abs_error_bound;
                        e["method"] = to_string(v.method);
                        if (t.exact()) e["exact"] = to_string(t.exact_value(x));
                    }
                    j[x.key()] = e;
                }
                if (eta_invariants) {
                    json inv = json::array();
                    for (const auto& c : t.recorded_invariants())
                        inv.push_back(
                            {{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"ok", c.ok}});
                    j = {{"error_model", model.describe()}, {"entries", j}, {"invariants", inv}};
                }
                emit(out, j);
            }
        } else if (val_cmd->parsed()) {
            sim.model = parse_error_model(val_error);
            sim.x = parse_x_distribution(val_x, val_p);
            sim.alpha = parse_alpha(val_alpha);
            sim.beta = val_beta;
            const RiskEstimate est = estimate_risk(sim);
            const EtaTable table = build_eta_table(sim.model);
            const RiskReport r = compute_risk(table, MomentSummary<Rational>{val_p, preset_aggregates(sim.x)});
            const double expansion = evaluate_risk(r.expansion, sim.alpha, sim.n).value;
            json j = {{"mc_mean", est.mean},
                      {"mc_se", est.std_error ? json(*est.std_error) : json(nullptr)},
                      {"expansion", expansion},
                      {"z", est.std_error && *est.std_error > 0 ? json((est.mean - expansion) / *est.std_error)
                                                               : json(nullptr)},
                      {"replications_used", est.replications_used},
                      {"fit_failures", est.fit_failures},
                      {"divergence_failures", est.divergence_failures}};
            emit(out, j);
        } else if (series_cmd->parsed()) {
            const auto m = series_moments.resolve();
            const RiskReport r = risk_report(series_model, m);
            const double a = parse_alpha(series_alpha);
            const int factor = n_per_k > 0 ? n_per_k : r.expansion.p + 2;
            if (k_min < 1 || k_max < k_min || k_inc < 1) throw ConfigError("need 1 <= k-min <= k-max and k-step >= 1");
            out << "k,ed_regression,ed_binomial\n" << std::setprecision(12);
            for (int k = k_min; k <= k_max; k += k_inc) {
                out << k << ',' << evaluate_risk(r.expansion, a, static_cast<long>(factor) * k).value << ','
                    << binomial_risk(0.5, a, k) << '\n';
            }
        } else if (table_cmd->parsed()) {
            const TableSpec spec = table_spec(table_name);
            std::map<std::string, EtaTable> tables;
            json rows = json::array();
            for (const auto& row : spec.rows) {
                auto it = tables.find(row.error);
                if (it == tables.end())
                    it = tables.emplace(row.error, build_eta_table(parse_error_model(row.error), 1e-10, table_threads))
                             .first;
                const RiskReport r = compute_risk(it->second, row.moments);
                const IdeResult i = ide(r.expansion, -1);
                const RssResult s = rss(r.expansion, -1);
                json jr = {{"label", row.label},  {"error_model", row.error},
                           {"ide", i.render()},   {"rss", render_rss(s)},
                           {"rss_n", s.n},        {"rss_k", s.k},
                           {"q", {r.expansion.qa, r.expansion.qb, r.expansion.qc}}};
                if (spec.n_actual) jr["coin_equivalent"] = coin_equivalent(r.expansion, -1, *spec.n_actual).n_exact;
                rows.push_back(jr);
            }
            if (table_format == "csv") {
                out << "label,ide,rss\n";
                for (const auto& jr : rows)
                    out << jr["label"].get<std::string>() << ',' << jr["ide"].get<std::string>() << ','
                        << jr["rss"].get<std::string>() << '\n';
            } else {
                emit(out, {{"table", table_name}, {"title", spec.title}, {"alpha", -1}, {"rows", rows}});
            }
        }
    } catch (const NumericError& e) {
        diagnostic("numeric", e.what());
        return 3;
    } catch (const ConfigError& e) {
        diagnostic("config", e.what());
        return 2;
    } catch (const json::exception& e) {
        diagnostic("config", e.what());
        return 2;
    }
    return 0;
}

}  // namespace regrisk::cli
