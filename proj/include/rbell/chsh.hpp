#pragma once

// Correlators E_{i,j} and the four CHSH combinations, from exact
// distributions, from exact subensemble weights, or from recorded trials.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rbell/errors.hpp"
#include "rbell/qstate.hpp"

namespace rbell {

using VickyTag = std::variant<BellOutcome, ParityOutcome>;

inline std::string to_string(const VickyTag& tag) {
    return std::visit([](auto t) { return std::string(to_string(t)); }, tag);
}

/// One run: settings in {1,2}, outcomes in {+1,-1}, optional postselection tag.
struct TrialRecord {
    std::uint64_t trial_id = 0;
    int alice_setting = 1;
    int bob_setting = 1;
    int alice_outcome = +1;
    int bob_outcome = +1;
    std::optional<VickyTag> vicky_tag;

    bool equal() const noexcept { return alice_outcome == bob_outcome; }

    void validate() const {
        if ((alice_setting != 1 && alice_setting != 2) || (bob_setting != 1 && bob_setting != 2))
            throw InvalidInput("trial settings must be 1 or 2");
        if ((alice_outcome != 1 && alice_outcome != -1) || (bob_outcome != 1 && bob_outcome != -1))
            throw InvalidInput("trial outcomes must be +1 or -1");
    }
};

/// Records that share one scenario.
class Ensemble {
public:
    explicit Ensemble(std::string scenario_id) : scenario_id_(std::move(scenario_id)) {}

    Ensemble(std::string scenario_id, std::vector<TrialRecord> records)
        : scenario_id_(std::move(scenario_id)), records_(std::move(records)) {
        for (const auto& r : records_) r.validate();
    }

    const std::string& scenario_id() const noexcept { return scenario_id_; }
    const std::vector<TrialRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }

    void add(const TrialRecord& r) {
        r.validate();
        records_.push_back(r);
    }

    void reserve(std::size_t n) { records_.reserve(n); }

private:
    std::string scenario_id_;
    std::vector<TrialRecord> records_;
};

// --------------------------------------------------------------------------
// Exact subensemble weights
// --------------------------------------------------------------------------

/// Unnormalized probability mass over (setting pair, outcome pair).
struct OutcomeWeights {
    std::array<std::array<JointDistribution, 2>, 2> cell{};

    JointDistribution& at(int alice_setting, int bob_setting) {
        return cell.at(static_cast<std::size_t>(alice_setting - 1)).at(static_cast<std::size_t>(bob_setting - 1));
    }
    const JointDistribution& at(int alice_setting, int bob_setting) const {
        return cell.at(static_cast<std::size_t>(alice_setting - 1)).at(static_cast<std::size_t>(bob_setting - 1));
    }

    double cell_total(int i, int j) const { return at(i, j).total(); }

    double total() const {
        double t = 0.0;
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j) t += cell_total(i, j);
        return t;
    }

    /// Fraction of mass where the given wing shows +1/-1.
    double alice_marginal(int outcome) const {
        double m = 0.0;
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j) m += at(i, j).alice_marginal(outcome);
        return m / total();
    }
    double bob_marginal(int outcome) const {
        double m = 0.0;
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j) m += at(i, j).bob_marginal(outcome);
        return m / total();
    }

    OutcomeWeights& operator+=(const OutcomeWeights& o) {
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b) cell[i][j].p[a][b] += o.cell[i][j].p[a][b];
        return *this;
    }
};

// --------------------------------------------------------------------------
// Correlator tables and CHSH reports
// --------------------------------------------------------------------------

struct CellCount {
    std::uint64_t equal = 0;
    std::uint64_t unequal = 0;

    std::uint64_t total() const noexcept { return equal + unequal; }
    friend bool operator==(const CellCount&, const CellCount&) = default;
};

using CountGrid = std::array<std::array<CellCount, 2>, 2>;

struct CorrelatorTable {
    std::array<std::array<double, 2>, 2> E{};
    /// Present for empirical tables, absent for exact ones.
    std::optional<CountGrid> counts;

    double e(int alice_setting, int bob_setting) const {
        return E.at(static_cast<std::size_t>(alice_setting - 1)).at(static_cast<std::size_t>(bob_setting - 1));
    }
    bool exact() const noexcept { return !counts.has_value(); }
};

/// The four signed combinations of (E11, E12, E21, E22); S_k flips the sign
/// of entry 4-k in that order (S1 flips E22, S4 flips E11).
inline constexpr std::array<std::array<int, 4>, 4> kChshSigns = {{
    {+1, +1, +1, -1},
    {+1, +1, -1, +1},
    {+1, -1, +1, +1},
    {-1, +1, +1, +1},
}};

inline constexpr double kClassicalBound = 2.0;

struct ChshReport {
    std::array<double, 4> S{};
    std::array<bool, 4> violated{};
    double max_S = 0.0;
    CorrelatorTable table;
};

inline std::array<double, 4> chsh_values(const CorrelatorTable& t) {
    const std::array<double, 4> e = {t.e(1, 1), t.e(1, 2), t.e(2, 1), t.e(2, 2)};
    std::array<double, 4> s{};
    for (std::size_t k = 0; k < 4; ++k) {
        double acc = 0.0;
        for (std::size_t n = 0; n < 4; ++n) acc += kChshSigns[k][n] * e[n];
        s[k] = std::abs(acc);
    }
    return s;
}

inline ChshReport chsh_report(const CorrelatorTable& table) {
    ChshReport r;
    r.table = table;
    r.S = chsh_values(table);
    for (std::size_t k = 0; k < 4; ++k) r.violated[k] = r.S[k] > kClassicalBound;
    r.max_S = *std::max_element(r.S.begin(), r.S.end());
    return r;
}

/// E_{i,j} = 2 p(A_i = B_j) - 1 for the given state.
template <class State>
CorrelatorTable correlators_exact(const State& state, const ExperimentAngles& angles) {
    CorrelatorTable t;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const JointDistribution d =
                joint_outcome_distribution(state, alice_observable(angles, i), bob_observable(angles, j));
            t.E[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = 2.0 * d.p_equal() - 1.0;
        }
    return t;
}

/// Per-cell conditional correlator of exact subensemble weights.
inline CorrelatorTable correlators_weighted(const OutcomeWeights& w) {
    CorrelatorTable t;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const JointDistribution& c = w.at(i, j);
            const double total = c.total();
            if (!(total > 0.0)) throw InsufficientData(i, j);
            t.E[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = (c.p_equal() - c.p_unequal()) / total;
        }
    return t;
}

inline CountGrid count_cells(std::span<const TrialRecord> records) {
    CountGrid g{};
    for (const auto& r : records) {
        r.validate();
        auto& c = g[static_cast<std::size_t>(r.alice_setting - 1)][static_cast<std::size_t>(r.bob_setting - 1)];
        if (r.equal())
            ++c.equal;
        else
            ++c.unequal;
    }
    return g;
}

inline CorrelatorTable correlators_from_counts(const CountGrid& g) {
    CorrelatorTable t;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const CellCount& c = g[i][j];
            if (c.total() == 0) throw InsufficientData(static_cast<int>(i) + 1, static_cast<int>(j) + 1);
            t.E[i][j] = (static_cast<double>(c.equal) - static_cast<double>(c.unequal)) / static_cast<double>(c.total());
        }
    t.counts = g;
    return t;
}

inline CorrelatorTable correlators_empirical(std::span<const TrialRecord> records) {
    return correlators_from_counts(count_cells(records));
}

inline CorrelatorTable correlators_empirical(const Ensemble& ensemble) {
    return correlators_empirical(std::span<const TrialRecord>(ensemble.records()));
}

/// Report for the union of several subensembles.
inline ChshReport pooled_report(std::span<const Ensemble> parts) {
    CountGrid g{};
    for (const auto& e : parts) {
        const CountGrid c = count_cells(e.records());
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                g[i][j].equal += c[i][j].equal;
                g[i][j].unequal += c[i][j].unequal;
            }
    }
    return chsh_report(correlators_from_counts(g));
}

inline ChshReport pooled_report(std::span<const OutcomeWeights> parts) {
    OutcomeWeights sum;
    for (const auto& w : parts) sum += w;
    return chsh_report(correlators_weighted(sum));
}

// --------------------------------------------------------------------------
// Binomial error bars
// --------------------------------------------------------------------------

/// sqrt((1 - E^2) / n) for one cell of an empirical table.
inline double correlator_standard_error(const CorrelatorTable& t, int i, int j) {
    if (!t.counts) return 0.0;
    const auto n = static_cast<double>(
        (*t.counts)[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)].total());
    const double e = t.e(i, j);
    return std::sqrt(std::max(0.0, 1.0 - e * e) / n);
}

/// One-sigma error of each S_k, cells treated as independent.
inline std::array<double, 4> chsh_standard_errors(const CorrelatorTable& t) {
    double var = 0.0;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const double s = correlator_standard_error(t, i, j);
            var += s * s;
        }
    const double sigma = std::sqrt(var);
    return {sigma, sigma, sigma, sigma};
}

}  // namespace rbell
