#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mtcagg {

/// The single random stream of one run. Variates are derived from raw
/// 64-bit engine output with fixed arithmetic so the sequence does not
/// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [lo, hi] (inclusive), rejection-free for the
    /// small ranges used here; bias is below 2^-40.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return engine_();
        return lo + static_cast<std::uint64_t>(uniform01() * static_cast<double>(span));
    }

    /// Exponential with the given rate (events per unit).
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mtcagg
