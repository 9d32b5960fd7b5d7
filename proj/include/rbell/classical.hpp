#pragma once

// Classical postselection with coins.
//
// Alice flips a quarter (setting 1) or a 100-yen coin (setting 2); Bob flips
// a 50-euro-cent coin (setting 1) or a 10-pence coin (setting 2). The raw
// ensemble is uncorrelated. Vicky then sorts trials into subensembles.
// Full-information strategies see the coins and faces; restricted ones see
// only a RedactedTrial (trial id plus equal/unequal), which is the whole
// information barrier.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbell/chsh.hpp"
#include "rbell/errors.hpp"
#include "rbell/parallel.hpp"
#include "rbell/qstate.hpp"
#include "rbell/rng.hpp"

namespace rbell {

inline constexpr int kQuarter = 1;
inline constexpr int kYen = 2;
inline constexpr int kEuro = 1;
inline constexpr int kPence = 2;

/// Face +1 is heads.
struct CoinTrial {
    std::uint64_t trial_id = 0;
    int alice_coin = kQuarter;
    int bob_coin = kEuro;
    int alice_face = +1;
    int bob_face = +1;

    bool equal() const noexcept { return alice_face == bob_face; }
    friend bool operator==(const CoinTrial&, const CoinTrial&) = default;
};

/// Proportions a, b, c, d of coin pairs ($€, $£, ¥€, ¥£).
struct SettingProportions {
    double a = 0.25, b = 0.25, c = 0.25, d = 0.25;

    static SettingProportions uniform() { return {}; }

    double at(int alice_coin, int bob_coin) const {
        const std::array<double, 4> v = {a, b, c, d};
        return v.at(static_cast<std::size_t>(2 * (alice_coin - 1) + (bob_coin - 1)));
    }

    void validate() const {
        for (double x : {a, b, c, d})
            if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("coin proportions must be finite and nonnegative");
        if (std::abs(a + b + c + d - 1.0) > kExactTolerance) throw InvalidInput("coin proportions must sum to 1");
    }
};

inline std::vector<CoinTrial> generate_coins(const SettingProportions& proportions, std::uint64_t trials,
                                             std::uint64_t seed) {
    proportions.validate();
    std::vector<CoinTrial> out(trials);
    const std::array<double, 4> w = {proportions.a, proportions.b, proportions.c, proportions.d};
    detail::parallel_for(out.size(), [&](std::size_t k) {
        RngStream rng = RngStream(seed).split(k);
        const std::size_t cell = rng.discrete(w);
        CoinTrial& t = out[k];
        t.trial_id = k;
        t.alice_coin = static_cast<int>(cell / 2) + 1;
        t.bob_coin = static_cast<int>(cell % 2) + 1;
        t.alice_face = rng.fair_sign();
        t.bob_face = rng.fair_sign();
    });
    return out;
}

// --------------------------------------------------------------------------
// Subensemble labels
// --------------------------------------------------------------------------

/// I..IV mimic Phi+, Psi+, Phi-, Psi-; I'..IV' are the S = 4 tables.
enum class SubensembleLabel { I, II, III, IV, I_prime, II_prime, III_prime, IV_prime, accept };

constexpr std::string_view to_string(SubensembleLabel l) noexcept {
    constexpr std::array<std::string_view, 9> names = {"I", "II", "III", "IV", "I'", "II'", "III'", "IV'", "accept"};
    return names[static_cast<std::size_t>(l)];
}

inline std::optional<SubensembleLabel> parse_subensemble_label(std::string_view s) {
    for (int k = 0; k <= static_cast<int>(SubensembleLabel::accept); ++k)
        if (to_string(static_cast<SubensembleLabel>(k)) == s) return static_cast<SubensembleLabel>(k);
    return std::nullopt;
}

constexpr SubensembleLabel mimic_label(BellOutcome k) noexcept {
    return static_cast<SubensembleLabel>(static_cast<int>(k));
}

struct ClassicalSubensembles {
    std::map<SubensembleLabel, std::vector<CoinTrial>> subensembles;
    std::vector<CoinTrial> discarded;

    std::size_t labeled_count() const {
        std::size_t n = 0;
        for (const auto& [l, v] : subensembles) n += v.size();
        return n;
    }
};

inline std::vector<TrialRecord> to_records(std::span<const CoinTrial> trials) {
    std::vector<TrialRecord> out;
    out.reserve(trials.size());
    for (const auto& t : trials) out.push_back({t.trial_id, t.alice_coin, t.bob_coin, t.alice_face, t.bob_face, {}});
    return out;
}

inline Ensemble to_ensemble(std::string scenario_id, std::span<const CoinTrial> trials) {
    return Ensemble(std::move(scenario_id), to_records(trials));
}

/// Fraction of trials where Alice's (or Bob's) coin shows heads.
inline double heads_fraction(std::span<const CoinTrial> trials, Side side) {
    if (trials.empty()) return 0.0;
    std::size_t heads = 0;
    for (const auto& t : trials) heads += (side == Side::alice ? t.alice_face : t.bob_face) == +1;
    return static_cast<double>(heads) / static_cast<double>(trials.size());
}

// --------------------------------------------------------------------------
// Strategies
// --------------------------------------------------------------------------

enum class InformationAccess { full, outcomes_only };

class PostselectionStrategy {
public:
    virtual ~PostselectionStrategy() = default;
    virtual std::string name() const = 0;
    virtual InformationAccess access() const = 0;
};

/// Probability of sending a trial to each label; any remainder is discarded.
using Assignment = std::vector<std::pair<SubensembleLabel, double>>;

class FullInformationStrategy : public PostselectionStrategy {
public:
    InformationAccess access() const final { return InformationAccess::full; }

    virtual std::vector<SubensembleLabel> labels() const = 0;
    virtual Assignment assignment(int alice_coin, int bob_coin, bool equal) const = 0;

    std::optional<SubensembleLabel> assign(const CoinTrial& t, RngStream& rng) const {
        const Assignment a = assignment(t.alice_coin, t.bob_coin, t.equal());
        double u = rng.uniform();
        for (const auto& [label, p] : a) {
            if (u < p) return label;
            u -= p;
        }
        return std::nullopt;
    }
};

/// Tables I-IV: split each (coin pair, equal/unequal) box across the four
/// Bell-state subensembles in proportion to p^psi (equal) or q^psi = 1 - p^psi.
class MimicStrategy final : public FullInformationStrategy {
public:
    explicit MimicStrategy(const ExperimentAngles& angles) {
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                for (BellOutcome k : kBellOutcomes)
                    p_equal_[cell(i, j)][static_cast<std::size_t>(k)] =
                        joint_outcome_distribution(bell_state(k), alice_observable(angles, i), bob_observable(angles, j))
                            .p_equal();
    }

    std::string name() const override { return "mimic"; }

    std::vector<SubensembleLabel> labels() const override {
        return {SubensembleLabel::I, SubensembleLabel::II, SubensembleLabel::III, SubensembleLabel::IV};
    }

    Assignment assignment(int alice_coin, int bob_coin, bool equal) const override {
        std::array<double, 4> w{};
        double total = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const double p = p_equal_[cell(alice_coin, bob_coin)][k];
            w[k] = equal ? p : 1.0 - p;
            total += w[k];
        }
        if (!(total > 0.0)) throw StrategyDegenerate("mimic weights vanish for a coin cell");
        Assignment a;
        for (BellOutcome k : kBellOutcomes) a.emplace_back(mimic_label(k), w[static_cast<std::size_t>(k)] / total);
        return a;
    }

    double p_equal(int alice_coin, int bob_coin, BellOutcome k) const {
        return p_equal_[cell(alice_coin, bob_coin)][static_cast<std::size_t>(k)];
    }

private:
    static std::size_t cell(int i, int j) { return static_cast<std::size_t>(2 * (i - 1) + (j - 1)); }
    std::array<std::array<double, 4>, 4> p_equal_{};
};

/// Tables I'-IV': each subensemble takes only "equal" or only "unequal"
/// trials per coin cell. Every trial is eligible for exactly two of the four
/// and goes to either with probability 1/2.
class SuperquantumStrategy final : public FullInformationStrategy {
public:
    std::string name() const override { return "superquantum"; }

    std::vector<SubensembleLabel> labels() const override {
        return {SubensembleLabel::I_prime, SubensembleLabel::II_prime, SubensembleLabel::III_prime,
                SubensembleLabel::IV_prime};
    }

    /// +1 where the table keeps equal faces, -1 where it keeps unequal ones;
    /// rows are I'..IV', columns (1,1), (1,2), (2,1), (2,2).
    static constexpr std::array<std::array<int, 4>, 4> kPattern = {{
        {+1, +1, +1, -1},
        {+1, +1, -1, +1},
        {-1, -1, +1, -1},
        {-1, -1, -1, +1},
    }};

    Assignment assignment(int alice_coin, int bob_coin, bool equal) const override {
        const std::size_t c = static_cast<std::size_t>(2 * (alice_coin - 1) + (bob_coin - 1));
        Assignment a;
        const std::vector<SubensembleLabel> ls = labels();
        for (std::size_t t = 0; t < 4; ++t)
            if ((kPattern[t][c] == +1) == equal) a.emplace_back(ls[t], 0.0);
        if (a.empty()) throw StrategyDegenerate("no superquantum table accepts this trial");
        for (auto& [l, p] : a) p = 1.0 / static_cast<double>(a.size());
        return a;
    }
};

/// Everything a restricted strategy may see about a trial.
struct RedactedTrial {
    std::uint64_t trial_id;
    bool equal;
};

inline RedactedTrial redact(const CoinTrial& t) { return {t.trial_id, t.equal()}; }

class RestrictedStrategy : public PostselectionStrategy {
public:
    InformationAccess access() const final { return InformationAccess::outcomes_only; }

    virtual double acceptance_probability(const RedactedTrial& t) const = 0;

    /// Acceptance rates for (equal, unequal) averaged over trial ids.
    virtual std::pair<double, double> mean_acceptance() const = 0;

    bool accept(const RedactedTrial& t, RngStream& rng) const { return rng.bernoulli(acceptance_probability(t)); }
};

/// Accepts equal/unequal trials at rates that give correlation `target_e`
/// with the largest possible acceptance.
class TargetCorrelationStrategy final : public RestrictedStrategy {
public:
    explicit TargetCorrelationStrategy(double target_e) : target_(target_e) {
        if (!std::isfinite(target_e) || std::abs(target_e) > 1.0)
            throw InvalidInput("target correlation must lie in [-1, 1]");
        if (target_e >= 0.0) {
            r_equal_ = 1.0;
            r_unequal_ = (1.0 - target_e) / (1.0 + target_e);
        } else {
            r_unequal_ = 1.0;
            r_equal_ = (1.0 + target_e) / (1.0 - target_e);
        }
    }

    std::string name() const override { return "restricted"; }
    double target() const noexcept { return target_; }

    double acceptance_probability(const RedactedTrial& t) const override { return t.equal ? r_equal_ : r_unequal_; }
    std::pair<double, double> mean_acceptance() const override { return {r_equal_, r_unequal_}; }

private:
    double target_;
    double r_equal_ = 1.0;
    double r_unequal_ = 1.0;
};

/// Acceptance rates that cycle with trial_id modulo the table length.
class PeriodicAcceptanceStrategy final : public RestrictedStrategy {
public:
    explicit PeriodicAcceptanceStrategy(std::vector<std::pair<double, double>> rates) : rates_(std::move(rates)) {
        if (rates_.empty()) throw InvalidInput("periodic strategy needs at least one rate pair");
        for (const auto& [re, ru] : rates_)
            if (!(re >= 0.0 && re <= 1.0 && ru >= 0.0 && ru <= 1.0)) throw InvalidInput("acceptance rates must be in [0,1]");
    }

    /// Random rate table of length 1..8 drawn from `rng`.
    static PeriodicAcceptanceStrategy random(RngStream& rng) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 8);
        std::vector<std::pair<double, double>> r(n);
        for (auto& [re, ru] : r) {
            re = rng.uniform();
            ru = rng.uniform();
        }
        return PeriodicAcceptanceStrategy(std::move(r));
    }

    std::string name() const override { return "periodic"; }

    double acceptance_probability(const RedactedTrial& t) const override {
        const auto& r = rates_[t.trial_id % rates_.size()];
        return t.equal ? r.first : r.second;
    }

    std::pair<double, double> mean_acceptance() const override {
        double re = 0.0, ru = 0.0;
        for (const auto& [a, b] : rates_) {
            re += a;
            ru += b;
        }
        return {re / static_cast<double>(rates_.size()), ru / static_cast<double>(rates_.size())};
    }

private:
    std::vector<std::pair<double, double>> rates_;
};

// --------------------------------------------------------------------------
// Applying strategies
// --------------------------------------------------------------------------

namespace detail {
// Postselection randomness is a sibling of the generation streams.
inline constexpr std::uint64_t kPostselectionKey = 0x706f737473656c65ULL;

inline RngStream postselection_stream(std::uint64_t seed, std::uint64_t trial_id) {
    return RngStream(seed).split(kPostselectionKey).split(trial_id);
}
}  // namespace detail

inline ClassicalSubensembles apply_strategy(const FullInformationStrategy& strategy, std::span<const CoinTrial> trials,
                                            std::uint64_t seed) {
    std::vector<std::optional<SubensembleLabel>> labels(trials.size());
    detail::parallel_for(trials.size(), [&](std::size_t k) {
        RngStream rng = detail::postselection_stream(seed, trials[k].trial_id);
        labels[k] = strategy.assign(trials[k], rng);
    });
    ClassicalSubensembles out;
    for (SubensembleLabel l : strategy.labels()) out.subensembles[l];
    for (std::size_t k = 0; k < trials.size(); ++k) {
        if (labels[k])
            out.subensembles[*labels[k]].push_back(trials[k]);
        else
            out.discarded.push_back(trials[k]);
    }
    return out;
}

/// Runs a restricted strategy; it only ever receives redacted trials.
inline ClassicalSubensembles apply_strategy(const RestrictedStrategy& strategy, std::span<const CoinTrial> trials,
                                            std::uint64_t seed) {
    std::vector<char> accepted(trials.size());
    detail::parallel_for(trials.size(), [&](std::size_t k) {
        RngStream rng = detail::postselection_stream(seed, trials[k].trial_id);
        accepted[k] = strategy.accept(redact(trials[k]), rng);
    });
    ClassicalSubensembles out;
    auto& acc = out.subensembles[SubensembleLabel::accept];
    for (std::size_t k = 0; k < trials.size(); ++k) (accepted[k] ? acc : out.discarded).push_back(trials[k]);
    return out;
}

inline ClassicalSubensembles postselect_mimic(std::span<const CoinTrial> trials, const ExperimentAngles& angles,
                                              std::uint64_t seed) {
    return apply_strategy(MimicStrategy(angles), trials, seed);
}

inline ClassicalSubensembles postselect_superquantum(std::span<const CoinTrial> trials, std::uint64_t seed) {
    return apply_strategy(SuperquantumStrategy(), trials, seed);
}

inline ClassicalSubensembles postselect_restricted(std::span<const CoinTrial> trials, double target_e,
                                                   std::uint64_t seed) {
    return apply_strategy(TargetCorrelationStrategy(target_e), trials, seed);
}

// --------------------------------------------------------------------------
// Exact-weight mode
// --------------------------------------------------------------------------

struct ClassicalWeights {
    std::map<SubensembleLabel, OutcomeWeights> subensembles;
    double discarded = 0.0;
};

/// Expected mass of every (label, coins, faces) cell. Each face pair of a
/// coin cell carries proportion/4.
inline ClassicalWeights exact_weights(const FullInformationStrategy& strategy, const SettingProportions& proportions) {
    proportions.validate();
    ClassicalWeights out;
    for (SubensembleLabel l : strategy.labels()) out.subensembles[l];
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            for (int fa : {+1, -1})
                for (int fb : {+1, -1}) {
                    const double mass = proportions.at(i, j) / 4.0;
                    double assigned = 0.0;
                    for (const auto& [label, p] : strategy.assignment(i, j, fa == fb)) {
                        out.subensembles[label].at(i, j).p[static_cast<std::size_t>(outcome_index(fa))]
                                                          [static_cast<std::size_t>(outcome_index(fb))] += mass * p;
                        assigned += p;
                    }
                    out.discarded += mass * (1.0 - assigned);
                }
    return out;
}

inline ClassicalWeights exact_weights(const RestrictedStrategy& strategy, const SettingProportions& proportions) {
    proportions.validate();
    const auto [r_equal, r_unequal] = strategy.mean_acceptance();
    ClassicalWeights out;
    auto& acc = out.subensembles[SubensembleLabel::accept];
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            for (int fa : {+1, -1})
                for (int fb : {+1, -1}) {
                    const double mass = proportions.at(i, j) / 4.0;
                    const double r = fa == fb ? r_equal : r_unequal;
                    acc.at(i, j).p[static_cast<std::size_t>(outcome_index(fa))]
                                  [static_cast<std::size_t>(outcome_index(fb))] += mass * r;
                    out.discarded += mass * (1.0 - r);
                }
    return out;
}

// --------------------------------------------------------------------------
// Restricted-information bound
// --------------------------------------------------------------------------

struct RestrictedBoundReport {
    std::string strategy;
    std::size_t accepted = 0;
    ChshReport report;
    std::array<double, 4> sigma{};
    /// Every S_k <= 2 + 3 sigma.
    bool within_bound = false;
    /// Largest |E_a - E_b| / sqrt(sigma_a^2 + sigma_b^2) over the six cell pairs.
    double max_pairwise_z = 0.0;
    /// All six pairs within 3 sigma.
    bool correlators_equal = false;
};

/// Feeds `strategy` through the information barrier and checks the accepted
/// ensemble against S <= 2. Strategies that need coin identities are refused.
inline RestrictedBoundReport verify_restricted_bound(const PostselectionStrategy& strategy,
                                                     std::span<const CoinTrial> trials, std::uint64_t seed) {
    const auto* restricted = dynamic_cast<const RestrictedStrategy*>(&strategy);
    if (strategy.access() != InformationAccess::outcomes_only || restricted == nullptr)
        throw InformationBarrierViolation("strategy '" + strategy.name() + "' requires coin identities");

    const ClassicalSubensembles sel = apply_strategy(*restricted, trials, seed);
    const auto& acc = sel.subensembles.at(SubensembleLabel::accept);

    RestrictedBoundReport r;
    r.strategy = strategy.name();
    r.accepted = acc.size();
    r.report = chsh_report(correlators_empirical(to_records(acc)));
    r.sigma = chsh_standard_errors(r.report.table);
    r.within_bound = true;
    for (std::size_t k = 0; k < 4; ++k)
        if (r.report.S[k] > kClassicalBound + 3.0 * r.sigma[k]) r.within_bound = false;

    const std::array<std::pair<int, int>, 4> cells = {{{1, 1}, {1, 2}, {2, 1}, {2, 2}}};
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = x + 1; y < 4; ++y) {
            const auto [i1, j1] = cells[x];
            const auto [i2, j2] = cells[y];
            const double s1 = correlator_standard_error(r.report.table, i1, j1);
            const double s2 = correlator_standard_error(r.report.table, i2, j2);
            const double diff = std::abs(r.report.table.e(i1, j1) - r.report.table.e(i2, j2));
            const double scale = std::sqrt(s1 * s1 + s2 * s2);
            const double z = scale > 0.0 ? diff / scale : (diff > 0.0 ? INFINITY : 0.0);
            r.max_pairwise_z = std::max(r.max_pairwise_z, z);
        }
    r.correlators_equal = r.max_pairwise_z <= 3.0;
    return r;
}

}  // namespace rbell
