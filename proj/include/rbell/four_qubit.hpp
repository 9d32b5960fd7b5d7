#pragma once

// Pure state of the four qubits in delayed-choice entanglement swapping.
//
// Qubit order is (Alice, Vicky-1, Vicky-2, Bob). The source pairs are
// (Alice, Vicky-1) and (Vicky-2, Bob). Vicky's Bell projector treats
// Vicky-1 as the first qubit of the Bell state; the outer pair is read with
// Alice first. Under this wiring, Bell outcome k on the inner pair leaves the
// outer pair in Bell state k.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "rbell/qstate.hpp"

namespace rbell {

enum class SwapQubit { alice = 0, vicky_1 = 1, vicky_2 = 2, bob = 3 };

class FourQubitState {
public:
    using Amplitudes = Eigen::Matrix<Complex, 16, 1>;

    explicit FourQubitState(const Amplitudes& amps) : amps_(amps) {
        if (std::abs(amps_.squaredNorm() - 1.0) > kExactTolerance)
            throw InvalidInput("four-qubit state must have unit norm");
    }

    /// |pair_1>_{Alice,Vicky-1} (x) |pair_2>_{Vicky-2,Bob}.
    static FourQubitState source_pairs(const TwoQubitState& pair_1, const TwoQubitState& pair_2) {
        Amplitudes v;
        for (int a = 0; a < 2; ++a)
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2)
                    for (int b = 0; b < 2; ++b) v(index(a, v1, v2, b)) = pair_1[2 * a + v1] * pair_2[2 * v2 + b];
        return FourQubitState(v);
    }

    static FourQubitState singlet_pairs() {
        const TwoQubitState s = bell_state(BellOutcome::psi_minus);
        return source_pairs(s, s);
    }

    static constexpr int index(int a, int v1, int v2, int b) { return 8 * a + 4 * v1 + 2 * v2 + b; }

    const Amplitudes& amplitudes() const noexcept { return amps_; }

    double local_probability(SwapQubit q, Angle angle, int outcome) const {
        return project_local_unnormalized(q, angle, outcome).squaredNorm();
    }

    /// Lüders update for a spin measurement on one qubit.
    FourQubitState collapse_local(SwapQubit q, Angle angle, int outcome) const {
        return renormalize(project_local_unnormalized(q, angle, outcome), "local spin outcome");
    }

    double inner_bell_probability(BellOutcome k) const { return project_inner_unnormalized(k).squaredNorm(); }

    FourQubitState collapse_inner_bell(BellOutcome k) const {
        return renormalize(project_inner_unnormalized(k), "inner Bell outcome");
    }

    /// Outer-pair state after the inner pair has been projected onto Bell state k.
    TwoQubitState outer_pair_given_inner(BellOutcome k) const {
        const TwoQubitState bell = bell_state(k);
        Vector4c outer = Vector4c::Zero();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int v1 = 0; v1 < 2; ++v1)
                    for (int v2 = 0; v2 < 2; ++v2)
                        outer(2 * a + b) += std::conj(bell[2 * v1 + v2]) * amps_(index(a, v1, v2, b));
        return TwoQubitState::normalized(outer);
    }

    /// Reduced state of (Alice, Bob), tracing out Vicky's qubits.
    TwoQubitMixedState outer_reduced() const {
        Matrix4c rho = Matrix4c::Zero();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                for (int v = 0; v < 4; ++v)
                    rho(r, c) += amps_(index(r / 2, v / 2, v % 2, r % 2)) *
                                 std::conj(amps_(index(c / 2, v / 2, v % 2, c % 2)));
        rho = 0.5 * (rho + rho.adjoint()).eval();
        return TwoQubitMixedState(rho);
    }

private:
    static constexpr int bit_shift(SwapQubit q) { return 3 - static_cast<int>(q); }

    Amplitudes project_local_unnormalized(SwapQubit q, Angle angle, int outcome) const {
        const Vector2 e = spin_vector(angle, outcome);
        const int mask = 1 << bit_shift(q);
        Amplitudes out = Amplitudes::Zero();
        for (int i = 0; i < 16; ++i) {
            if (i & mask) continue;
            const Complex c = e(0) * amps_(i) + e(1) * amps_(i | mask);
            out(i) = e(0) * c;
            out(i | mask) = e(1) * c;
        }
        return out;
    }

    Amplitudes project_inner_unnormalized(BellOutcome k) const {
        const TwoQubitState bell = bell_state(k);
        Amplitudes out = Amplitudes::Zero();
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                Complex overlap = 0.0;
                for (int v = 0; v < 4; ++v) overlap += std::conj(bell[v]) * amps_(index(a, v / 2, v % 2, b));
                for (int v = 0; v < 4; ++v) out(index(a, v / 2, v % 2, b)) = bell[v] * overlap;
            }
        }
        return out;
    }

    static FourQubitState renormalize(const Amplitudes& v, const char* what) {
        const double p = v.squaredNorm();
        if (!(p > kImpossibleProbability))
            throw ImpossibleOutcome(std::string("zero-probability branch: ") + what);
        return FourQubitState(v / std::sqrt(p));
    }

    Amplitudes amps_;
};

}  // namespace rbell
