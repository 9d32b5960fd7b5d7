#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rbell/qstate.hpp"

using namespace rbell;

namespace {

constexpr double kTol = 1e-12;
// cos^2(pi/8), from the numpy oracle in tests/oracles.
constexpr double kCos2PiOver8 = 0.8535533905932737;

Angle rad(double r) { return Angle::from_radians(r); }

double closed_form(BellOutcome k, double a, double b) {
    switch (k) {
        case BellOutcome::phi_plus: return std::pow(std::cos(a - b), 2);
        case BellOutcome::psi_plus: return std::pow(std::sin(a + b), 2);
        case BellOutcome::phi_minus: return std::pow(std::cos(a + b), 2);
        case BellOutcome::psi_minus: return std::pow(std::sin(a - b), 2);
    }
    return NAN;
}

TwoQubitState up_up() { return TwoQubitState::product(Vector2(1, 0), Vector2(1, 0)); }

}  // namespace

TEST(Angle, NormalizesIntoHalfOpenRange) {
    EXPECT_NEAR(rad(3 * kPi).radians(), kPi, kTol);
    EXPECT_NEAR(rad(-kPi).radians(), kPi, kTol);
    EXPECT_NEAR(rad(2 * kPi + 0.25).radians(), 0.25, kTol);
    EXPECT_NEAR(rad(-0.5).radians(), -0.5, kTol);
}

TEST(Angle, RejectsNonFinite) {
    EXPECT_THROW(rad(NAN), InvalidInput);
    EXPECT_THROW(rad(INFINITY), InvalidInput);
}

TEST(Projector, Examples) {
    const Matrix2 p0 = projector(rad(0)).matrix();
    EXPECT_NEAR((p0 - (Matrix2() << 1, 0, 0, 0).finished()).norm(), 0, kTol);
    const Matrix2 p90 = projector(rad(kPi / 2)).matrix();
    EXPECT_NEAR((p90 - (Matrix2() << 0, 0, 0, 1).finished()).norm(), 0, kTol);
    const Matrix2 p45 = projector(rad(kPi / 4)).matrix();
    EXPECT_NEAR((p45 - Matrix2::Constant(0.5)).norm(), 0, kTol);
}

TEST(Projector, IdempotentTraceOneSymmetricForRandomAngles) {
    RngStream rng(11);
    for (int n = 0; n < 1000; ++n) {
        const Matrix2 p = projector(rad((2 * rng.uniform() - 1) * 10)).matrix();
        ASSERT_NEAR((p * p - p).cwiseAbs().maxCoeff(), 0, kTol);
        ASSERT_NEAR(p.trace(), 1, kTol);
        ASSERT_NEAR((p - p.transpose()).cwiseAbs().maxCoeff(), 0, kTol);
    }
}

TEST(Projector, ComplementIsOrthogonal) {
    const Projector2 p = projector(rad(0.3));
    EXPECT_NEAR((p.matrix() * p.complement().matrix()).norm(), 0, kTol);
    EXPECT_NEAR((p.matrix() + p.complement().matrix() - Matrix2::Identity()).norm(), 0, kTol);
}

TEST(SpinVector, RejectsBadOutcome) { EXPECT_THROW(spin_vector(rad(0), 0), InvalidInput); }

TEST(LocalObservable, EigenvaluesArePlusMinusOne) {
    RngStream rng(12);
    for (int n = 0; n < 100; ++n) {
        const LocalObservable a(Side::alice, 1, rad(rng.uniform() * 6));
        Eigen::SelfAdjointEigenSolver<Matrix4c> eig(a.pair_matrix());
        const auto ev = eig.eigenvalues();
        EXPECT_NEAR(ev(0), -1, kTol);
        EXPECT_NEAR(ev(1), -1, kTol);
        EXPECT_NEAR(ev(2), 1, kTol);
        EXPECT_NEAR(ev(3), 1, kTol);
    }
}

TEST(LocalObservable, ActsOnItsOwnWing) {
    const LocalObservable a(Side::alice, 1, rad(0));
    const LocalObservable b(Side::bob, 1, rad(0));
    // sigma_z (x) 1 versus 1 (x) sigma_z in (uu, ud, du, dd) order.
    EXPECT_NEAR(a.pair_matrix()(1, 1).real(), 1, kTol);
    EXPECT_NEAR(a.pair_matrix()(2, 2).real(), -1, kTol);
    EXPECT_NEAR(b.pair_matrix()(1, 1).real(), -1, kTol);
    EXPECT_NEAR(b.pair_matrix()(2, 2).real(), 1, kTol);
}

TEST(LocalObservable, RejectsBadSetting) { EXPECT_THROW(LocalObservable(Side::bob, 3, rad(0)), InvalidInput); }

TEST(BellState, Amplitudes) {
    const double h = std::numbers::sqrt2 / 2;
    const auto phi = bell_state(BellOutcome::phi_plus);
    EXPECT_NEAR(std::abs(phi[0] - h), 0, kTol);
    EXPECT_NEAR(std::abs(phi[3] - h), 0, kTol);
    const auto psi = bell_state(BellOutcome::psi_minus);
    EXPECT_NEAR(std::abs(psi[1] - h), 0, kTol);
    EXPECT_NEAR(std::abs(psi[2] + h), 0, kTol);
    EXPECT_NEAR(std::abs(psi[0]), 0, kTol);
}

TEST(BellState, Orthonormal) {
    for (auto a : kBellOutcomes)
        for (auto b : kBellOutcomes)
            EXPECT_NEAR(std::abs(bell_state(a).inner(bell_state(b)) - Complex(a == b ? 1.0 : 0.0)), 0, kTol);
}

TEST(BellState, EqualMixtureIsMaximallyMixed) {
    Matrix4c rho = Matrix4c::Zero();
    for (auto k : kBellOutcomes) rho += 0.25 * bell_state(k).density();
    EXPECT_NEAR((rho - Matrix4c::Identity() / 4.0).cwiseAbs().maxCoeff(), 0, kTol);
}

TEST(TwoQubitState, RejectsNonUnitNorm) {
    EXPECT_THROW(TwoQubitState(Vector4c(1, 1, 0, 0)), InvalidInput);
    EXPECT_NO_THROW(TwoQubitState::normalized(Vector4c(1, 1, 0, 0)));
}

TEST(MixedState, Validation) {
    EXPECT_THROW(TwoQubitMixedState(Matrix4c::Identity()), InvalidInput);
    Matrix4c bad = Matrix4c::Identity() / 4.0;
    bad(0, 1) = 0.1;
    EXPECT_THROW(TwoQubitMixedState{bad}, InvalidInput);
    Matrix4c neg = Matrix4c::Zero();
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    EXPECT_THROW(TwoQubitMixedState{neg}, InvalidInput);
}

TEST(MixedState, ReducedOfBellStateIsMaximallyMixed) {
    for (auto k : kBellOutcomes) {
        const TwoQubitMixedState rho(bell_state(k));
        EXPECT_NEAR((rho.reduced(Side::alice) - Matrix2c::Identity() / 2.0).norm(), 0, kTol);
        EXPECT_NEAR((rho.reduced(Side::bob) - Matrix2c::Identity() / 2.0).norm(), 0, kTol);
    }
}

TEST(JointDistribution, Examples) {
    const auto phi = bell_state(BellOutcome::phi_plus);
    const auto d = joint_outcome_distribution(phi, LocalObservable(Side::alice, 1, rad(0)),
                                              LocalObservable(Side::bob, 1, rad(kPi / 8)));
    EXPECT_NEAR(d.p_equal(), kCos2PiOver8, kTol);

    const auto singlet = joint_outcome_distribution(bell_state(BellOutcome::psi_minus),
                                                    LocalObservable(Side::alice, 1, rad(0)),
                                                    LocalObservable(Side::bob, 1, rad(0)));
    EXPECT_NEAR(singlet.p_equal(), 0, kTol);

    const auto mm = joint_outcome_distribution(TwoQubitMixedState::maximally_mixed(),
                                               LocalObservable(Side::alice, 2, rad(0.7)),
                                               LocalObservable(Side::bob, 1, rad(-1.1)));
    for (int a : {1, -1})
        for (int b : {1, -1}) EXPECT_NEAR(mm(a, b), 0.25, kTol);
}

TEST(JointDistribution, MismatchedSidesRejected) {
    const auto s = bell_state(BellOutcome::phi_plus);
    const LocalObservable a(Side::alice, 1, rad(0));
    EXPECT_THROW(joint_outcome_distribution(s, a, a), InvalidInput);
    EXPECT_THROW(joint_outcome_distribution(s, LocalObservable(Side::bob, 1, rad(0)), a), InvalidInput);
}

TEST(JointDistribution, BellClosedFormsForRandomAngles) {
    RngStream rng(13);
    for (int n = 0; n < 1000; ++n) {
        const double a = (2 * rng.uniform() - 1) * kPi;
        const double b = (2 * rng.uniform() - 1) * kPi;
        const LocalObservable A(Side::alice, 1, rad(a));
        const LocalObservable B(Side::bob, 1, rad(b));
        for (auto k : kBellOutcomes) {
            const auto d = joint_outcome_distribution(bell_state(k), A, B);
            ASSERT_NEAR(d.p_equal(), closed_form(k, a, b), kTol);
            ASSERT_NEAR(d.total(), 1.0, kTol);
            for (int x : {1, -1})
                for (int y : {1, -1}) ASSERT_GE(d(x, y), -kTol);
        }
    }
}

TEST(JointDistribution, NoSignalling) {
    RngStream rng(14);
    std::vector<TwoQubitMixedState> states;
    for (auto k : kBellOutcomes) states.emplace_back(bell_state(k));
    const auto& pp = bell_state(BellOutcome::phi_plus);
    const auto& pm = bell_state(BellOutcome::phi_minus);
    const auto& sp = bell_state(BellOutcome::psi_plus);
    const auto& sm = bell_state(BellOutcome::psi_minus);
    states.push_back(TwoQubitMixedState::mixture<2>({0.5, 0.5}, {pp, pm}));
    states.push_back(TwoQubitMixedState::mixture<2>({0.5, 0.5}, {sp, sm}));
    for (int n = 0; n < 200; ++n) {
        const LocalObservable A(Side::alice, 1, rad(rng.uniform() * 6));
        const LocalObservable B1(Side::bob, 1, rad(rng.uniform() * 6));
        const LocalObservable B2(Side::bob, 2, rad(rng.uniform() * 6));
        const LocalObservable A2(Side::alice, 2, rad(rng.uniform() * 6));
        for (const auto& s : states) {
            ASSERT_NEAR(joint_outcome_distribution(s, A, B1).alice_marginal(1),
                        joint_outcome_distribution(s, A, B2).alice_marginal(1), kTol);
            ASSERT_NEAR(joint_outcome_distribution(s, A, B1).bob_marginal(1),
                        joint_outcome_distribution(s, A2, B1).bob_marginal(1), kTol);
        }
    }
}

TEST(Sampler, MatchesExactOnPhiPlus) {
    const auto s = bell_state(BellOutcome::phi_plus);
    const auto angles = standard_angles();
    const auto A = alice_observable(angles, 1);
    const auto B = bob_observable(angles, 1);
    const auto exact = joint_outcome_distribution(s, A, B);
    RngStream rng(15);
    const int N = 1000000;
    int counts[2][2] = {};
    for (int n = 0; n < N; ++n) {
        const auto [a, b] = sample_joint_outcome(s, A, B, rng);
        ++counts[outcome_index(a)][outcome_index(b)];
    }
    const double p_eq = double(counts[0][0] + counts[1][1]) / N;
    EXPECT_NEAR(p_eq, kCos2PiOver8, 0.002);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double p = exact.p[i][j];
            EXPECT_NEAR(counts[i][j] / double(N), p, 4 * std::sqrt(p * (1 - p) / N));
        }
}

TEST(Sampler, ReproducibleForFixedSeed) {
    const auto s = bell_state(BellOutcome::phi_plus);
    const auto A = alice_observable(standard_angles(), 2);
    const auto B = bob_observable(standard_angles(), 1);
    RngStream r1(99), r2(99);
    for (int n = 0; n < 1000; ++n) ASSERT_EQ(sample_joint_outcome(s, A, B, r1), sample_joint_outcome(s, A, B, r2));
}

TEST(Sampler, DegenerateCells) {
    RngStream rng(16);
    const LocalObservable A(Side::alice, 1, rad(0));
    const LocalObservable B(Side::bob, 1, rad(0));
    for (int n = 0; n < 1000; ++n) {
        const auto [a, b] = sample_joint_outcome(bell_state(BellOutcome::psi_minus), A, B, rng);
        ASSERT_NE(a, b);
        ASSERT_EQ(sample_joint_outcome(up_up(), A, B, rng), std::make_pair(1, 1));
    }
}

TEST(BellMeasurement, Examples) {
    const auto uu = bell_measurement(up_up());
    EXPECT_NEAR(uu[BellOutcome::phi_plus], 0.5, kTol);
    EXPECT_NEAR(uu[BellOutcome::phi_minus], 0.5, kTol);
    EXPECT_NEAR(uu[BellOutcome::psi_plus], 0, kTol);
    EXPECT_NEAR(uu[BellOutcome::psi_minus], 0, kTol);
    const auto mm = bell_measurement(TwoQubitMixedState::maximally_mixed());
    for (auto k : kBellOutcomes) EXPECT_NEAR(mm[k], 0.25, kTol);
    EXPECT_NEAR(bell_measurement(bell_state(BellOutcome::psi_plus))[BellOutcome::psi_plus], 1, kTol);
}

TEST(ParityMeasurement, Examples) {
    EXPECT_NEAR(parity_measurement(up_up())[ParityOutcome::phi], 1, kTol);
    EXPECT_NEAR(parity_measurement(up_up())[ParityOutcome::psi], 0, kTol);
    const auto mm = parity_measurement(TwoQubitMixedState::maximally_mixed());
    EXPECT_NEAR(mm[ParityOutcome::phi], 0.5, kTol);
    EXPECT_NEAR(mm[ParityOutcome::psi], 0.5, kTol);
    EXPECT_NEAR(parity_measurement(bell_state(BellOutcome::psi_minus))[ParityOutcome::psi], 1, kTol);
}

TEST(ParityMeasurement, SamplerNeverReturnsImpossibleLabel) {
    RngStream rng(17);
    const auto d = parity_measurement(bell_state(BellOutcome::psi_minus));
    for (int n = 0; n < 1000; ++n) ASSERT_EQ(d.sample(rng), ParityOutcome::psi);
}

TEST(Collapse, MaximallyMixedLocalMeasurementIsFair) {
    const auto rho = TwoQubitMixedState::maximally_mixed();
    const LocalObservable A(Side::alice, 1, rad(0));
    RngStream rng(18);
    int plus = 0;
    const int N = 100000;
    for (int n = 0; n < N; ++n) {
        const auto m = measure_and_collapse(rho, Side::alice, A, rng);
        EXPECT_NEAR(m.probability, 0.5, kTol);
        plus += m.outcome == 1;
    }
    EXPECT_NEAR(plus / double(N), 0.5, 4 * std::sqrt(0.25 / N));
}

TEST(Collapse, SingletAliceUpLeavesBobDown) {
    const TwoQubitMixedState rho(bell_state(BellOutcome::psi_minus));
    const auto c = collapse_local(rho, LocalObservable(Side::alice, 1, rad(0)), +1);
    EXPECT_NEAR(c.probability, 0.5, kTol);
    const Matrix2c bob = c.state.reduced(Side::bob);
    EXPECT_NEAR(std::abs(bob(1, 1) - 1.0), 0, kTol);
    EXPECT_NEAR(std::abs(bob(0, 0)), 0, kTol);

    RngStream rng(19);
    for (int n = 0; n < 20; ++n) {
        const auto m = measure_and_collapse(rho, Side::alice, LocalObservable(Side::alice, 1, rad(0)), rng);
        const int down = m.outcome == 1 ? 1 : 0;
        EXPECT_NEAR(std::abs(m.other_side(down, down) - 1.0), 0, kTol);
    }
}

TEST(Collapse, ImpossibleBranchThrows) {
    const TwoQubitMixedState rho(up_up());
    EXPECT_THROW(collapse_local(rho, LocalObservable(Side::alice, 1, rad(0)), -1), ImpossibleOutcome);
    EXPECT_THROW(collapse_bell(rho, BellOutcome::psi_plus), ImpossibleOutcome);
    EXPECT_THROW(collapse_parity(rho, ParityOutcome::psi), ImpossibleOutcome);
}

TEST(Collapse, WrongSideThrows) {
    RngStream rng(20);
    EXPECT_THROW(measure_and_collapse(TwoQubitMixedState::maximally_mixed(), Side::bob,
                                      LocalObservable(Side::alice, 1, rad(0)), rng),
                 InvalidInput);
}

TEST(Collapse, BellCollapseOfMaximallyMixedGivesBellState) {
    const auto rho = TwoQubitMixedState::maximally_mixed();
    for (auto k : kBellOutcomes) {
        const auto c = collapse_bell(rho, k);
        EXPECT_NEAR(c.probability, 0.25, kTol);
        EXPECT_NEAR((c.state.matrix() - bell_state(k).density()).cwiseAbs().maxCoeff(), 0, kTol);
    }
}
