#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace glzero {

/// SplitMix64 (Steele, Lea, Flood 2014). Every random draw in the library
/// goes through this generator so runs can be reproduced from one recorded
/// 64-bit seed, including from other languages.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

    /// Standard normal via Box-Muller (no cached second value, so the stream
    /// position depends only on the number of calls).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

/// Derive an independent stream seed for a job from the run seed and a key.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    SplitMix64 g(seed ^ (key * 0xD1B54A32D192ED03ULL));
    return g.next();
}

} // namespace glzero
