#pragma once

// Quadratic Gauss sums G(a, b, c) = sum_{n=0}^{c-1} e((a n^2 + b n) / c) for odd c.

#include "sqsieve/arith.hpp"
#include "sqsieve/compensated.hpp"

#include <cmath>

namespace sqsieve {

struct GaussSumParams
{
    i64 a = 0;
    i64 b = 0;
    u64 c = 1;
};

inline constexpr u64 kMaxDirectGaussModulus = 10'000'000;

/// Term-by-term compensated evaluation of the defining sum.
inline Complex gauss_direct(const GaussSumParams& g)
{
    require(g.c >= 1, "gauss_direct: modulus must be positive");
    if (g.c > kMaxDirectGaussModulus)
        throw OversizeError("gauss_direct: modulus exceeds the 1e7 runtime guard");
    const u64 c = g.c;
    const u64 a = mod_reduce(g.a, c);
    const u64 b = mod_reduce(g.b, c);
    ComplexAccumulator acc;
    // phase(n) = a n^2 + b n, updated incrementally: phase(n+1) - phase(n) = a(2n + 1) + b
    u64 phase = 0;
    u64 step = add_mod(a, b, c);
    const u64 two_a = add_mod(a, a, c);
    for (u64 n = 0; n < c; ++n) {
        acc += unit_phase(phase, c);
        phase = add_mod(phase, step, c);
        step = add_mod(step, two_a, c);
    }
    return acc.value();
}

/// 1 if c = 1 mod 4, i if c = 3 mod 4.
inline Complex epsilon_c(u64 c)
{
    require((c & 1) == 1, "epsilon_c: modulus must be odd");
    return (c % 4 == 1) ? Complex{1.0, 0.0} : Complex{0.0, 1.0};
}

/// Closed-form evaluation: reduce by d = gcd(a, c); zero if d does not divide b; otherwise
/// d * eps * (a'|c') * e(-(4a')^{-1} b'^2 / c') * sqrt(c') with a' = a/d, b' = b/d, c' = c/d.
inline Complex gauss_closed_form(const GaussSumParams& g)
{
    require(g.c >= 1 && (g.c & 1) == 1, "gauss_closed_form: modulus must be odd and positive");
    const u64 c = g.c;
    const u64 a = mod_reduce(g.a, c);
    const u64 b = mod_reduce(g.b, c);
    const u64 d = std::gcd(a, c); // gcd(0, c) = c
    if (b % d != 0)
        return {0.0, 0.0};
    const u64 cr = c / d;
    if (cr == 1)
        return {static_cast<double>(d), 0.0};
    const u64 ar = (a / d) % cr;
    const u64 br = (b / d) % cr;
    u64 inv4a = 0;
    try_inv_mod(mul_mod(4, ar, cr), cr, inv4a);
    const u64 phase = sub_mod(0, mul_mod(inv4a, mul_mod(br, br, cr), cr), cr);
    const double scale = static_cast<double>(d) * jacobi_unchecked(ar, cr) * std::sqrt(static_cast<double>(cr));
    return scale * epsilon_c(cr) * unit_phase(phase, cr);
}

} // namespace sqsieve
