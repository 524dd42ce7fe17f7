#pragma once

#include <cstdint>

namespace lgcert {

// Counter-based random streams built on the SplitMix64 finalizer. A draw is
// a pure function of (master seed, round index, draw index), so trial
// generation is order-independent and chunks of rounds can be produced in
// any order or in parallel with bit-identical results on every platform.

namespace rng {

inline constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer: full-avalanche 64-bit mix.
inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// 64-bit value for draw k of round i under the given seed.
inline std::uint64_t at(std::uint64_t seed, std::uint64_t round, std::uint64_t draw) {
    const std::uint64_t key = mix(seed + golden * (round + 1));
    return mix(key + golden * (draw + 1));
}

/// Double in [0, 1) with 53 random bits.
inline double uniform(std::uint64_t seed, std::uint64_t round, std::uint64_t draw) {
    return static_cast<double>(at(seed, round, draw) >> 11) * 0x1.0p-53;
}

} // namespace rng

/// Sequential SplitMix64 stream for places where a plain generator is enough
/// (optimizer restarts, test data). Same mixing core as the counter stream.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += rng::golden;
        return rng::mix(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

} // namespace lgcert
