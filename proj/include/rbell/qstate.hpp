#pragma once

// Two-qubit states, spin projectors along in-plane angles, and the
// projective measurements used by the postselection protocols: local spin
// measurements, the complete Bell-basis measurement, and the parity
// (Phi vs Psi) measurement.
//
// Basis order is (up-up, up-down, down-up, down-down) with Alice's qubit
// first. Outcome +1 is "spin up along the measured angle".

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "rbell/errors.hpp"
#include "rbell/rng.hpp"

namespace rbell {

using Complex = std::complex<double>;
using Vector2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;
using Vector4c = Eigen::Vector4cd;
using Matrix4c = Eigen::Matrix4cd;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kExactTolerance = 1e-12;
/// Branch probabilities at or below this are treated as impossible.
inline constexpr double kImpossibleProbability = 1e-14;

// --------------------------------------------------------------------------
// Angles and projectors
// --------------------------------------------------------------------------

/// Measurement direction in radians, stored in (-pi, pi].
class Angle {
public:
    constexpr Angle() = default;

    static Angle from_radians(double radians) {
        if (!std::isfinite(radians)) throw InvalidInput("angle must be finite");
        double r = std::remainder(radians, 2.0 * kPi);
        if (r <= -kPi) r += 2.0 * kPi;
        return Angle(r);
    }

    constexpr double radians() const noexcept { return radians_; }

    friend constexpr bool operator==(Angle, Angle) = default;

private:
    constexpr explicit Angle(double r) : radians_(r) {}
    double radians_ = 0.0;
};

enum class Side { alice, bob };

constexpr std::string_view to_string(Side s) noexcept { return s == Side::alice ? "alice" : "bob"; }

/// The two settings per wing for one CHSH experiment.
struct ExperimentAngles {
    std::array<Angle, 2> alice;
    std::array<Angle, 2> bob;

    Angle alice_angle(int setting) const { return alice.at(static_cast<std::size_t>(setting - 1)); }
    Angle bob_angle(int setting) const { return bob.at(static_cast<std::size_t>(setting - 1)); }
};

/// alpha = (0, pi/4), beta = (pi/8, -pi/8): one Bell state per CHSH
/// combination reaches 2*sqrt(2).
inline ExperimentAngles standard_angles() {
    return {{Angle::from_radians(0.0), Angle::from_radians(kPi / 4)},
            {Angle::from_radians(kPi / 8), Angle::from_radians(-kPi / 8)}};
}

/// Rank-1 real projector onto (cos phi, sin phi).
class Projector2 {
public:
    explicit Projector2(const Matrix2& m) : m_(m) {}

    const Matrix2& matrix() const noexcept { return m_; }
    double operator()(int r, int c) const { return m_(r, c); }

    Projector2 complement() const { return Projector2(Matrix2::Identity() - m_); }

private:
    Matrix2 m_;
};

inline Projector2 projector(Angle angle) {
    const double c = std::cos(angle.radians());
    const double s = std::sin(angle.radians());
    Matrix2 m;
    m << c * c, c * s, c * s, s * s;
    return Projector2(m);
}

/// Unit eigenvector of P_angle - P_angle^perp for eigenvalue `outcome`.
inline Vector2 spin_vector(Angle angle, int outcome) {
    const double c = std::cos(angle.radians());
    const double s = std::sin(angle.radians());
    if (outcome == +1) return Vector2(c, s);
    if (outcome == -1) return Vector2(-s, c);
    throw InvalidInput("spin outcome must be +1 or -1");
}

/// A_i or B_j: the +/-1 observable P - P^perp on one wing, identity on the other.
class LocalObservable {
public:
    LocalObservable(Side side, int setting_index, Angle angle)
        : side_(side), setting_(setting_index), angle_(angle) {
        if (setting_index != 1 && setting_index != 2)
            throw InvalidInput("setting index must be 1 or 2");
    }

    Side side() const noexcept { return side_; }
    int setting_index() const noexcept { return setting_; }
    Angle angle() const noexcept { return angle_; }

    /// Single-qubit matrix P - P^perp (eigenvalues exactly +1, -1).
    Matrix2 local_matrix() const {
        const Matrix2 p = projector(angle_).matrix();
        return 2.0 * p - Matrix2::Identity();
    }

    /// Rank-1 single-qubit projector for the given eigenvalue.
    Matrix2 outcome_projector(int outcome) const {
        const Vector2 v = spin_vector(angle_, outcome);
        return v * v.transpose();
    }

    /// 4x4 operator on the pair.
    Matrix4c pair_matrix() const { return embed(local_matrix()); }

    Matrix4c embed(const Matrix2& local) const {
        const Matrix2c l = local.cast<Complex>();
        const Matrix2c id = Matrix2c::Identity();
        return side_ == Side::alice ? kron(l, id) : kron(id, l);
    }

    static Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
        Matrix4c out;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        return out;
    }

private:
    Side side_;
    int setting_;
    Angle angle_;
};

inline LocalObservable alice_observable(const ExperimentAngles& angles, int setting) {
    return LocalObservable(Side::alice, setting, angles.alice_angle(setting));
}

inline LocalObservable bob_observable(const ExperimentAngles& angles, int setting) {
    return LocalObservable(Side::bob, setting, angles.bob_angle(setting));
}

// --------------------------------------------------------------------------
// Outcome labels
// --------------------------------------------------------------------------

/// Bell-basis outcomes, in the order Phi+, Psi+, Phi-, Psi-.
enum class BellOutcome { phi_plus = 0, psi_plus = 1, phi_minus = 2, psi_minus = 3 };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::phi_plus, BellOutcome::psi_plus, BellOutcome::phi_minus, BellOutcome::psi_minus};

/// Phi = span{Phi+, Phi-} (equal spins), Psi = span{Psi+, Psi-}.
enum class ParityOutcome { phi = 0, psi = 1 };

inline constexpr std::array<ParityOutcome, 2> kParityOutcomes = {ParityOutcome::phi, ParityOutcome::psi};

constexpr std::string_view to_string(BellOutcome b) noexcept {
    switch (b) {
        case BellOutcome::phi_plus: return "Phi+";
        case BellOutcome::psi_plus: return "Psi+";
        case BellOutcome::phi_minus: return "Phi-";
        case BellOutcome::psi_minus: return "Psi-";
    }
    return "?";
}

constexpr std::string_view to_string(ParityOutcome p) noexcept { return p == ParityOutcome::phi ? "Phi" : "Psi"; }

// --------------------------------------------------------------------------
// States
// --------------------------------------------------------------------------

class TwoQubitState {
public:
    explicit TwoQubitState(const Vector4c& amplitudes) : amps_(amplitudes) {
        if (std::abs(amps_.squaredNorm() - 1.0) > kExactTolerance)
            throw InvalidInput("two-qubit state must have unit norm");
    }

    static TwoQubitState normalized(const Vector4c& amplitudes) {
        const double n = amplitudes.norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("cannot normalize a zero or non-finite vector");
        return TwoQubitState(amplitudes / n);
    }

    static TwoQubitState product(const Vector2& alice, const Vector2& bob) {
        Vector4c v;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) v(2 * a + b) = alice(a) * bob(b);
        return normalized(v);
    }

    const Vector4c& amplitudes() const noexcept { return amps_; }
    Complex operator[](int k) const { return amps_(k); }

    Complex inner(const TwoQubitState& other) const { return amps_.dot(other.amps_); }

    Matrix4c density() const { return amps_ * amps_.adjoint(); }

private:
    Vector4c amps_;
};

inline TwoQubitState bell_state(BellOutcome label) {
    const double h = std::numbers::sqrt2 / 2.0;
    Vector4c v = Vector4c::Zero();
    switch (label) {
        case BellOutcome::phi_plus: v << h, 0, 0, h; break;
        case BellOutcome::psi_plus: v << 0, h, h, 0; break;
        case BellOutcome::phi_minus: v << h, 0, 0, -h; break;
        case BellOutcome::psi_minus: v << 0, h, -h, 0; break;
    }
    return TwoQubitState(v);
}

/// Projector onto span{Phi+, Phi-} or span{Psi+, Psi-}.
inline Matrix4c parity_projector(ParityOutcome p) {
    Matrix4c m = Matrix4c::Zero();
    if (p == ParityOutcome::phi) {
        m(0, 0) = 1.0;
        m(3, 3) = 1.0;
    } else {
        m(1, 1) = 1.0;
        m(2, 2) = 1.0;
    }
    return m;
}

class TwoQubitMixedState {
public:
    explicit TwoQubitMixedState(const Matrix4c& rho) : rho_(rho) {
        if (!rho_.allFinite()) throw InvalidInput("density matrix must be finite");
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kExactTolerance)
            throw InvalidInput("density matrix must be Hermitian");
        if (std::abs(rho_.trace() - Complex(1.0)) > kExactTolerance)
            throw InvalidInput("density matrix must have unit trace");
        Eigen::SelfAdjointEigenSolver<Matrix4c> eig(rho_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw InvalidInput("density matrix must be positive semidefinite");
    }

    TwoQubitMixedState(const TwoQubitState& pure) : TwoQubitMixedState(pure.density()) {}  // NOLINT

    /// Skips validation; for results of Lüders updates on already-valid states.
    static TwoQubitMixedState trusted(const Matrix4c& rho) { return TwoQubitMixedState(rho, Trusted{}); }

    static TwoQubitMixedState maximally_mixed() { return TwoQubitMixedState(Matrix4c::Identity() / 4.0); }

    /// sum_k weights[k] |states[k]><states[k]|; weights must sum to 1.
    template <std::size_t N>
    static TwoQubitMixedState mixture(const std::array<double, N>& weights,
                                      const std::array<TwoQubitState, N>& states) {
        Matrix4c rho = Matrix4c::Zero();
        for (std::size_t k = 0; k < N; ++k) {
            if (weights[k] < 0.0) throw InvalidInput("mixture weights must be nonnegative");
            rho += weights[k] * states[k].density();
        }
        return TwoQubitMixedState(rho);
    }

    const Matrix4c& matrix() const noexcept { return rho_; }

    double expectation(const Matrix4c& op) const { return (rho_ * op).trace().real(); }

    /// Reduced single-qubit state of one wing.
    Matrix2c reduced(Side keep) const {
        Matrix2c r = Matrix2c::Zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    r(i, j) += keep == Side::alice ? rho_(2 * i + k, 2 * j + k) : rho_(2 * k + i, 2 * k + j);
        return r;
    }

private:
    struct Trusted {};
    TwoQubitMixedState(const Matrix4c& rho, Trusted) : rho_(rho) {}

    Matrix4c rho_;
};

inline TwoQubitMixedState to_mixed(const TwoQubitState& s) { return TwoQubitMixedState(s); }
inline const TwoQubitMixedState& to_mixed(const TwoQubitMixedState& s) { return s; }

// --------------------------------------------------------------------------
// Outcome distributions
// --------------------------------------------------------------------------

inline constexpr int outcome_index(int outcome) { return outcome == +1 ? 0 : 1; }
inline constexpr int outcome_value(int index) { return index == 0 ? +1 : -1; }

/// Probabilities of (alice outcome, bob outcome), indexed [alice][bob] with
/// index 0 for +1 and 1 for -1.
struct JointDistribution {
    std::array<std::array<double, 2>, 2> p{};

    double operator()(int alice_outcome, int bob_outcome) const {
        return p[outcome_index(alice_outcome)][outcome_index(bob_outcome)];
    }
    double p_equal() const { return p[0][0] + p[1][1]; }
    double p_unequal() const { return p[0][1] + p[1][0]; }
    double correlator() const { return p_equal() - p_unequal(); }
    double alice_marginal(int outcome) const {
        const auto i = static_cast<std::size_t>(outcome_index(outcome));
        return p[i][0] + p[i][1];
    }
    double bob_marginal(int outcome) const {
        const auto j = static_cast<std::size_t>(outcome_index(outcome));
        return p[0][j] + p[1][j];
    }
    double total() const { return p_equal() + p_unequal(); }
};

namespace detail {

inline void require_wings(const LocalObservable& a, const LocalObservable& b) {
    if (a.side() != Side::alice || b.side() != Side::bob)
        throw InvalidInput("joint measurement needs an Alice observable and a Bob observable");
}

inline Matrix4c product_projector(const LocalObservable& a, int sa, const LocalObservable& b, int sb) {
    return LocalObservable::kron(a.outcome_projector(sa).cast<Complex>(), b.outcome_projector(sb).cast<Complex>());
}

}  // namespace detail

inline JointDistribution joint_outcome_distribution(const TwoQubitState& state, const LocalObservable& a,
                                                    const LocalObservable& b) {
    detail::require_wings(a, b);
    JointDistribution d;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Vector2 va = spin_vector(a.angle(), outcome_value(i));
            const Vector2 vb = spin_vector(b.angle(), outcome_value(j));
            Complex amp = 0.0;
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) amp += va(x) * vb(y) * state[2 * x + y];
            d.p[i][j] = std::norm(amp);
        }
    }
    return d;
}

inline JointDistribution joint_outcome_distribution(const TwoQubitMixedState& state, const LocalObservable& a,
                                                    const LocalObservable& b) {
    detail::require_wings(a, b);
    JointDistribution d;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            d.p[i][j] = state.expectation(detail::product_projector(a, outcome_value(i), b, outcome_value(j)));
    return d;
}

template <class State>
std::pair<int, int> sample_joint_outcome(const State& state, const LocalObservable& a, const LocalObservable& b,
                                         RngStream& rng) {
    const JointDistribution d = joint_outcome_distribution(state, a, b);
    const std::array<double, 4> w = {d.p[0][0], d.p[0][1], d.p[1][0], d.p[1][1]};
    const std::size_t k = rng.discrete(w);
    return {outcome_value(static_cast<int>(k / 2)), outcome_value(static_cast<int>(k % 2))};
}

/// Finite distribution over an enum label set.
template <class Label, std::size_t N>
struct LabelDistribution {
    std::array<double, N> p{};

    double operator[](Label l) const { return p[static_cast<std::size_t>(l)]; }
    double total() const {
        double t = 0.0;
        for (double x : p) t += x;
        return t;
    }
    Label sample(RngStream& rng) const { return static_cast<Label>(rng.discrete(p)); }
};

using BellDistribution = LabelDistribution<BellOutcome, 4>;
using ParityDistribution = LabelDistribution<ParityOutcome, 2>;

inline BellDistribution bell_measurement(const TwoQubitState& state) {
    BellDistribution d;
    for (BellOutcome k : kBellOutcomes) d.p[static_cast<std::size_t>(k)] = std::norm(bell_state(k).inner(state));
    return d;
}

inline BellDistribution bell_measurement(const TwoQubitMixedState& state) {
    BellDistribution d;
    for (BellOutcome k : kBellOutcomes)
        d.p[static_cast<std::size_t>(k)] = state.expectation(bell_state(k).density());
    return d;
}

inline ParityDistribution parity_measurement(const TwoQubitMixedState& state) {
    ParityDistribution d;
    for (ParityOutcome k : kParityOutcomes) d.p[static_cast<std::size_t>(k)] = state.expectation(parity_projector(k));
    return d;
}

inline ParityDistribution parity_measurement(const TwoQubitState& state) {
    return parity_measurement(TwoQubitMixedState(state));
}

// --------------------------------------------------------------------------
// Lüders collapse
// --------------------------------------------------------------------------

/// Post-measurement state together with the probability of the branch.
struct Collapse {
    double probability;
    TwoQubitMixedState state;
};

namespace detail {

inline Collapse luders(const TwoQubitMixedState& rho, const Matrix4c& proj, const char* what) {
    const double p = rho.expectation(proj);
    if (!(p > kImpossibleProbability)) throw ImpossibleOutcome(std::string("zero-probability branch: ") + what);
    Matrix4c next = proj * rho.matrix() * proj / p;
    next = 0.5 * (next + next.adjoint()).eval();
    return {p, TwoQubitMixedState::trusted(next)};
}

}  // namespace detail

/// Projects onto the `outcome` eigenspace of `obs` on its own wing.
inline Collapse collapse_local(const TwoQubitMixedState& rho, const LocalObservable& obs, int outcome) {
    return detail::luders(rho, obs.embed(obs.outcome_projector(outcome)), "local spin outcome");
}

inline Collapse collapse_bell(const TwoQubitMixedState& rho, BellOutcome k) {
    return detail::luders(rho, bell_state(k).density(), "Bell outcome");
}

inline Collapse collapse_parity(const TwoQubitMixedState& rho, ParityOutcome k) {
    return detail::luders(rho, parity_projector(k), "parity outcome");
}

struct LocalMeasurement {
    int outcome;
    double probability;
    TwoQubitMixedState collapsed;
    /// Conditional state of the unmeasured wing, given `outcome`.
    Matrix2c other_side;
};

/// Samples `obs` on `side` and applies the Lüders update.
inline LocalMeasurement measure_and_collapse(const TwoQubitMixedState& rho, Side side, const LocalObservable& obs,
                                             RngStream& rng) {
    if (obs.side() != side) throw InvalidInput("observable does not act on the requested side");
    const double p_plus = rho.expectation(obs.embed(obs.outcome_projector(+1)));
    const std::array<double, 2> w = {std::max(p_plus, 0.0), std::max(1.0 - p_plus, 0.0)};
    const int outcome = outcome_value(static_cast<int>(rng.discrete(w)));
    Collapse c = collapse_local(rho, obs, outcome);
    const Side other = side == Side::alice ? Side::bob : Side::alice;
    return {outcome, c.probability, c.state, c.state.reduced(other)};
}

}  // namespace rbell
