#pragma once

#include "sqsieve/compensated.hpp"

#include <cstdint>

namespace sqsieve {

/// SplitMix64 (Steele, Lea, Flood 2014): 64-bit state advanced by the golden-ratio increment,
/// output finalized with the two xor-shift-multiply rounds below. Every draw used by the
/// toolkit goes through this class so seeded runs are reproducible across platforms; it does
/// not use std::uniform_*_distribution, whose output is implementation-defined.
class SplitMix64
{
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n), by rejection of the biased tail.
    std::uint64_t below(std::uint64_t n)
    {
        require(n > 0, "SplitMix64::below: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        require(lo <= hi, "SplitMix64::between: empty range");
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform point on the unit circle.
    Complex unit_complex() { return unit_phase_real(uniform()); }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

} // namespace sqsieve
