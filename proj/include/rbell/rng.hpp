#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace rbell {

/// Seedable, splittable SplitMix64 stream.
///
/// Substreams are derived by hashing (state, key), so a run seeded with S
/// gives trial `id` the stream `RngStream(S).split(id)` no matter how trials
/// are scheduled across threads. Uniform doubles use the top 53 bits, which
/// keeps sampling bit-identical across standard libraries.
class RngStream {
public:
    using result_type = std::uint64_t;

    constexpr explicit RngStream(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += kGolden;
        return mix(state_);
    }

    /// Independent child stream for `key`; does not advance this stream.
    constexpr RngStream split(std::uint64_t key) const noexcept {
        return RngStream(mix(state_ ^ mix(key + kGolden)));
    }

    /// Uniform on [0, 1).
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    /// +1 or -1 with equal probability.
    constexpr int fair_sign() noexcept { return ((*this)() >> 63) != 0 ? -1 : +1; }

    /// Index drawn from unnormalized nonnegative weights. Zero-weight entries
    /// are never returned.
    std::size_t discrete(std::span<const double> weights) noexcept {
        double total = 0.0;
        for (double w : weights) total += w;
        const double u = uniform() * total;
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k] <= 0.0) continue;
            last_positive = k;
            cum += weights[k];
            if (u < cum) return k;
        }
        return last_positive;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace rbell
