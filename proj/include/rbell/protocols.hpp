#pragma once

// Quantum postselection scenarios.
//
//   reverse  Alice and Bob each measure a maximally mixed qubit; Vicky
//            Bell-measures the pair and tags the trial with her outcome.
//   swap     Two singlets (Alice, Vicky-1) and (Vicky-2, Bob); Alice and Bob
//            measure the outer qubits, Vicky Bell-measures the inner pair.
//   parity   As reverse, but Vicky only measures P^Phi vs P^Psi.
//
// Every scenario runs in two modes sharing one ScenarioConfig. Exact mode
// enumerates all measurement branches in the configured order and returns
// the weight of every (tag, settings, outcomes) cell. Sampled mode draws
// one branch per trial from the per-trial RNG substream
// RngStream(seed).split(trial_id).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rbell/chsh.hpp"
#include "rbell/errors.hpp"
#include "rbell/four_qubit.hpp"
#include "rbell/parallel.hpp"
#include "rbell/qstate.hpp"
#include "rbell/rng.hpp"

namespace rbell {

enum class Scenario { reverse, swap, parity };

constexpr std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::reverse: return "reverse";
        case Scenario::swap: return "swap";
        case Scenario::parity: return "parity";
    }
    return "?";
}

enum class Party { alice, bob, vicky };

constexpr std::string_view to_string(Party p) noexcept {
    switch (p) {
        case Party::alice: return "alice";
        case Party::bob: return "bob";
        case Party::vicky: return "vicky";
    }
    return "?";
}

/// Order in which the three measurements act within a trial.
using MeasurementOrder = std::array<Party, 3>;

inline constexpr MeasurementOrder kVickyFirst = {Party::vicky, Party::alice, Party::bob};
inline constexpr MeasurementOrder kAbFirst = {Party::alice, Party::bob, Party::vicky};

inline void validate_order(const MeasurementOrder& order) {
    bool seen[3] = {false, false, false};
    for (Party p : order) seen[static_cast<int>(p)] = true;
    if (!(seen[0] && seen[1] && seen[2])) throw InvalidInput("measurement order must be a permutation of alice, bob, vicky");
}

/// Distribution over setting pairs (1,1), (1,2), (2,1), (2,2).
struct SettingPolicy {
    std::array<double, 4> p = {0.25, 0.25, 0.25, 0.25};

    static SettingPolicy uniform() { return {}; }

    double at(int alice_setting, int bob_setting) const {
        return p.at(static_cast<std::size_t>(2 * (alice_setting - 1) + (bob_setting - 1)));
    }

    void validate() const {
        double total = 0.0;
        for (double x : p) {
            if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("setting proportions must be finite and nonnegative");
            total += x;
        }
        if (std::abs(total - 1.0) > kExactTolerance) throw InvalidInput("setting proportions must sum to 1");
    }

    std::pair<int, int> sample(RngStream& rng) const {
        const std::size_t k = rng.discrete(p);
        return {static_cast<int>(k / 2) + 1, static_cast<int>(k % 2) + 1};
    }
};

struct ScenarioConfig {
    Scenario scenario = Scenario::reverse;
    ExperimentAngles angles = standard_angles();
    SettingPolicy setting_policy;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    MeasurementOrder order = kAbFirst;

    void validate() const {
        if (trials < 1) throw InvalidInput("trials must be at least 1");
        setting_policy.validate();
        validate_order(order);
    }
};

/// Sampled output: one ensemble per Vicky tag.
struct PostselectedEnsembles {
    std::string scenario_id;
    std::map<VickyTag, Ensemble> subensembles;
    /// Always 0 for quantum scenarios; kept for parity with classical output.
    std::uint64_t discarded = 0;

    /// All records in trial_id order.
    Ensemble pooled() const {
        std::vector<TrialRecord> all;
        for (const auto& [tag, e] : subensembles) all.insert(all.end(), e.records().begin(), e.records().end());
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.trial_id < y.trial_id; });
        return Ensemble(scenario_id, std::move(all));
    }

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (const auto& [tag, e] : subensembles) n += e.size();
        return n;
    }
};

/// Exact output: probability mass per tag, including the setting policy.
struct ExactSubensembles {
    std::string scenario_id;
    std::map<VickyTag, OutcomeWeights> weights;

    CorrelatorTable table(const VickyTag& tag) const { return correlators_weighted(weights.at(tag)); }
    ChshReport report(const VickyTag& tag) const { return chsh_report(table(tag)); }
    double tag_probability(const VickyTag& tag) const { return weights.at(tag).total(); }

    OutcomeWeights pooled_weights() const {
        OutcomeWeights sum;
        for (const auto& [tag, w] : weights) sum += w;
        return sum;
    }
    ChshReport pooled() const { return chsh_report(correlators_weighted(pooled_weights())); }
};

namespace detail {

// Two qubits (Alice's, Bob's) starting maximally mixed. Vicky either
// resolves the full Bell basis or only the parity projectors.
class PairRegister {
public:
    PairRegister(bool parity_only) : rho_(TwoQubitMixedState::maximally_mixed()), parity_only_(parity_only) {}

    double local_probability(Side side, const LocalObservable& obs, int outcome) const {
        (void)side;
        return rho_.expectation(obs.embed(obs.outcome_projector(outcome)));
    }
    PairRegister collapse_local(Side, const LocalObservable& obs, int outcome) const {
        return PairRegister(rbell::collapse_local(rho_, obs, outcome).state, parity_only_);
    }

    std::size_t vicky_outcome_count() const { return parity_only_ ? 2 : 4; }
    VickyTag vicky_tag(std::size_t k) const {
        if (parity_only_) return kParityOutcomes[k];
        return kBellOutcomes[k];
    }
    double vicky_probability(std::size_t k) const {
        return parity_only_ ? rho_.expectation(parity_projector(kParityOutcomes[k]))
                            : rho_.expectation(bell_state(kBellOutcomes[k]).density());
    }
    PairRegister collapse_vicky(std::size_t k) const {
        return parity_only_ ? PairRegister(collapse_parity(rho_, kParityOutcomes[k]).state, true)
                            : PairRegister(collapse_bell(rho_, kBellOutcomes[k]).state, false);
    }

private:
    PairRegister(TwoQubitMixedState rho, bool parity_only) : rho_(std::move(rho)), parity_only_(parity_only) {}

    TwoQubitMixedState rho_;
    bool parity_only_;
};

class SwapRegister {
public:
    SwapRegister() : psi_(FourQubitState::singlet_pairs()) {}

    double local_probability(Side side, const LocalObservable& obs, int outcome) const {
        return psi_.local_probability(qubit(side), obs.angle(), outcome);
    }
    SwapRegister collapse_local(Side side, const LocalObservable& obs, int outcome) const {
        return SwapRegister(psi_.collapse_local(qubit(side), obs.angle(), outcome));
    }

    std::size_t vicky_outcome_count() const { return 4; }
    VickyTag vicky_tag(std::size_t k) const { return kBellOutcomes[k]; }
    double vicky_probability(std::size_t k) const { return psi_.inner_bell_probability(kBellOutcomes[k]); }
    SwapRegister collapse_vicky(std::size_t k) const { return SwapRegister(psi_.collapse_inner_bell(kBellOutcomes[k])); }

private:
    explicit SwapRegister(FourQubitState psi) : psi_(std::move(psi)) {}
    static SwapQubit qubit(Side s) { return s == Side::alice ? SwapQubit::alice : SwapQubit::bob; }

    FourQubitState psi_;
};

struct Branch {
    int alice_outcome = 0;
    int bob_outcome = 0;
    std::size_t vicky = 0;
};

template <class Register>
void enumerate_branches(const Register& reg, const MeasurementOrder& order, std::size_t step,
                        const LocalObservable& a, const LocalObservable& b, Branch branch, double prob,
                        const std::function<void(const Register&, const Branch&, double)>& leaf) {
    if (step == order.size()) {
        leaf(reg, branch, prob);
        return;
    }
    const Party who = order[step];
    if (who == Party::vicky) {
        for (std::size_t k = 0; k < reg.vicky_outcome_count(); ++k) {
            const double p = reg.vicky_probability(k);
            if (!(p > kImpossibleProbability)) continue;
            Branch next = branch;
            next.vicky = k;
            enumerate_branches(reg.collapse_vicky(k), order, step + 1, a, b, next, prob * p, leaf);
        }
        return;
    }
    const Side side = who == Party::alice ? Side::alice : Side::bob;
    const LocalObservable& obs = who == Party::alice ? a : b;
    for (int outcome : {+1, -1}) {
        const double p = reg.local_probability(side, obs, outcome);
        if (!(p > kImpossibleProbability)) continue;
        Branch next = branch;
        (who == Party::alice ? next.alice_outcome : next.bob_outcome) = outcome;
        enumerate_branches(reg.collapse_local(side, obs, outcome), order, step + 1, a, b, next, prob * p, leaf);
    }
}

template <class Register>
ExactSubensembles run_exact_on(const Register& initial, const ScenarioConfig& config) {
    config.validate();
    ExactSubensembles out;
    out.scenario_id = std::string(to_string(config.scenario));
    for (std::size_t k = 0; k < initial.vicky_outcome_count(); ++k) out.weights[initial.vicky_tag(k)] = OutcomeWeights{};
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            const double p_setting = config.setting_policy.at(i, j);
            const LocalObservable a = alice_observable(config.angles, i);
            const LocalObservable b = bob_observable(config.angles, j);
            enumerate_branches<Register>(
                initial, config.order, 0, a, b, Branch{}, p_setting,
                [&](const Register& reg, const Branch& br, double prob) {
                    auto& cell = out.weights[reg.vicky_tag(br.vicky)].at(i, j);
                    cell.p[static_cast<std::size_t>(outcome_index(br.alice_outcome))]
                          [static_cast<std::size_t>(outcome_index(br.bob_outcome))] += prob;
                });
        }
    }
    return out;
}

template <class Register>
TrialRecord sample_trial(const Register& initial, const ScenarioConfig& config, std::uint64_t trial_id) {
    RngStream rng = RngStream(config.seed).split(trial_id);
    const auto [i, j] = config.setting_policy.sample(rng);
    const LocalObservable a = alice_observable(config.angles, i);
    const LocalObservable b = bob_observable(config.angles, j);
    Register reg = initial;
    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.alice_setting = i;
    rec.bob_setting = j;
    for (Party who : config.order) {
        if (who == Party::vicky) {
            std::array<double, 4> w{};
            for (std::size_t k = 0; k < reg.vicky_outcome_count(); ++k) w[k] = std::max(0.0, reg.vicky_probability(k));
            const std::size_t k = rng.discrete(std::span<const double>(w.data(), reg.vicky_outcome_count()));
            rec.vicky_tag = reg.vicky_tag(k);
            reg = reg.collapse_vicky(k);
            continue;
        }
        const Side side = who == Party::alice ? Side::alice : Side::bob;
        const LocalObservable& obs = who == Party::alice ? a : b;
        const double p_plus = std::clamp(reg.local_probability(side, obs, +1), 0.0, 1.0);
        const std::array<double, 2> w = {p_plus, 1.0 - p_plus};
        const int outcome = outcome_value(static_cast<int>(rng.discrete(w)));
        (who == Party::alice ? rec.alice_outcome : rec.bob_outcome) = outcome;
        reg = reg.collapse_local(side, obs, outcome);
    }
    return rec;
}

template <class Register>
PostselectedEnsembles run_sampled_on(const Register& initial, const ScenarioConfig& config) {
    config.validate();
    std::vector<TrialRecord> records(config.trials);
    parallel_for(records.size(), [&](std::size_t k) { records[k] = sample_trial(initial, config, k); });

    PostselectedEnsembles out;
    out.scenario_id = std::string(to_string(config.scenario));
    for (std::size_t k = 0; k < initial.vicky_outcome_count(); ++k)
        out.subensembles.emplace(initial.vicky_tag(k), Ensemble(out.scenario_id));
    for (const auto& r : records) out.subensembles.at(*r.vicky_tag).add(r);
    return out;
}

inline void require_scenario(const ScenarioConfig& config, Scenario expected) {
    if (config.scenario != expected)
        throw InvalidInput("config scenario is " + std::string(to_string(config.scenario)) + ", expected " +
                           std::string(to_string(expected)));
}

}  // namespace detail

inline PostselectedEnsembles run_reverse(const ScenarioConfig& config) {
    detail::require_scenario(config, Scenario::reverse);
    return detail::run_sampled_on(detail::PairRegister(false), config);
}

inline PostselectedEnsembles run_swap(const ScenarioConfig& config) {
    detail::require_scenario(config, Scenario::swap);
    return detail::run_sampled_on(detail::SwapRegister(), config);
}

inline PostselectedEnsembles run_parity(const ScenarioConfig& config) {
    detail::require_scenario(config, Scenario::parity);
    return detail::run_sampled_on(detail::PairRegister(true), config);
}

inline ExactSubensembles exact_reverse(const ScenarioConfig& config) {
    detail::require_scenario(config, Scenario::reverse);
    return detail::run_exact_on(detail::PairRegister(false), config);
}

inline ExactSubensembles exact_swap(const ScenarioConfig& config) {
    detail::require_scenario(config, Scenario::swap);
    return detail::run_exact_on(detail::SwapRegister(), config);
}

inline ExactSubensembles exact_parity(const ScenarioConfig& config) {
    detail::require_scenario(config, Scenario::parity);
    return detail::run_exact_on(detail::PairRegister(true), config);
}

inline PostselectedEnsembles run_scenario(const ScenarioConfig& config) {
    switch (config.scenario) {
        case Scenario::reverse: return run_reverse(config);
        case Scenario::swap: return run_swap(config);
        case Scenario::parity: return run_parity(config);
    }
    throw InvalidInput("unknown scenario");
}

inline ExactSubensembles exact_scenario(const ScenarioConfig& config) {
    switch (config.scenario) {
        case Scenario::reverse: return exact_reverse(config);
        case Scenario::swap: return exact_swap(config);
        case Scenario::parity: return exact_parity(config);
    }
    throw InvalidInput("unknown scenario");
}

/// Reverse-protocol tag with the same tagged statistics as swap tag `k`.
/// Identity under the wiring documented in four_qubit.hpp.
constexpr BellOutcome swap_to_reverse_tag(BellOutcome k) noexcept { return k; }

}  // namespace rbell
