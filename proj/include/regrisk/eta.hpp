#pragma once

#include "regrisk/error_model.hpp"
#include "regrisk/rational.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace regrisk {

// eta[i,j,k,l] = E[(d3)^i (d2)^j (d1)^k y^l] under the error density, where
// dr is the r-th derivative of log f.
struct EtaIndex {
    int i = 0, j = 0, k = 0, l = 0;

    std::string key() const;  // "i,j,k,l"
    bool operator==(const EtaIndex&) const = default;
    auto operator<=>(const EtaIndex&) const = default;
};

enum class EtaMethod { ClosedForm, Quadrature, MonteCarlo };
const char* to_string(EtaMethod m);

struct EtaEntry {
    double value = 0.0;
    double abs_error_bound = 0.0;
    EtaMethod method = EtaMethod::ClosedForm;
};

struct InvariantCheck {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool ok = true;
};

class EtaTable {
public:
    static constexpr int kMaxI = 1, kMaxJ = 2, kMaxK = 4, kMaxL = 4;
    static constexpr int kSize = (kMaxI + 1) * (kMaxJ + 1) * (kMaxK + 1) * (kMaxL + 1);

    static bool in_grid(const EtaIndex& x);
    static std::vector<EtaIndex> grid();

    explicit EtaTable(std::string model_name = "") : model_name_(std::move(model_name)) {}

    void set(const EtaIndex& x, const EtaEntry& e, std::optional<Rational> exact = std::nullopt);
    void mark_divergent(const EtaIndex& x, std::string reason);

    bool available(const EtaIndex& x) const;
    bool divergent(const EtaIndex& x) const;
    const std::string& divergence_reason(const EtaIndex& x) const;
    // Throws NumericError naming the entry if it is missing or divergent.
    const EtaEntry& entry(const EtaIndex& x) const;
    double operator()(int i, int j, int k, int l) const { return entry({i, j, k, l}).value; }

    // True when every available entry carries an exact rational value.
    bool exact() const;
    const Rational& exact_value(const EtaIndex& x) const;

    const std::string& model_name() const { return model_name_; }

    // The five identities every eta table satisfies (normalization, zero mean
    // score, and the three integration-by-parts relations) plus positivity of
    // the location information.
    std::vector<InvariantCheck> check_invariants() const;
    const std::vector<InvariantCheck>& recorded_invariants() const { return invariants_; }
    void record_invariants() { invariants_ = check_invariants(); }

private:
    static int flat(const EtaIndex& x);

    std::string model_name_;
    std::array<std::optional<EtaEntry>, kSize> entries_{};
    std::array<std::optional<Rational>, kSize> exact_{};
    std::array<std::string, kSize> divergent_{};
    std::vector<InvariantCheck> invariants_;
};

Rational eta_normal(int i, int j, int k, int l);

// Closed form for the t(nu) error. Exact for rational nu; throws NumericError
// "moment diverges" when the integral does not exist.
Rational eta_t(int i, int j, int k, int l, const Rational& nu);
bool eta_t_converges(int i, int j, int k, int l, const Rational& nu);

// Adaptive double-exponential quadrature of the defining integral; throws
// NumericError when the error estimate does not reach tol.
EtaEntry eta_quadrature(const ErrorModel& model, int i, int j, int k, int l, double tol = 1e-10);

// Plain Monte-Carlo estimate; abs_error_bound holds the standard error.
EtaEntry eta_monte_carlo(const ErrorModel& model, int i, int j, int k, int l, std::uint64_t draws,
                         std::uint64_t seed);

// Closed form for Normal and StudentT, quadrature otherwise. Entries whose
// defining integral diverges are marked rather than rejected; the pipeline
// refuses to use them.
EtaTable build_eta_table(const ErrorModel& model, double tol = 1e-10, int threads = 0);

// Variant that ignores closed forms (for dual-path checks).
EtaTable build_eta_table_by_quadrature(const ErrorModel& model, double tol = 1e-10, int threads = 0);

}  // namespace regrisk
