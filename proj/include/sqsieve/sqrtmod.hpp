#pragma once

// Complete sets of modular square roots {k mod r : k^2 = s mod r} for odd r.

#include "sqsieve/arith.hpp"

#include <algorithm>
#include <vector>

namespace sqsieve {

struct SquareRootSet
{
    u64 target = 0; // s mod r
    FactoredModulus modulus;
    std::vector<u64> roots; // sorted, distinct, each in [0, r)

    u64 r() const { return modulus.value(); }
    std::size_t size() const { return roots.size(); }
    bool empty() const { return roots.empty(); }
};

namespace detail {

// Tonelli-Shanks for s a nonzero quadratic residue mod odd prime p. Non-residue found by
// ascending trial from 2.
inline u64 tonelli_shanks(u64 s, u64 p)
{
    if (p % 4 == 3)
        return pow_mod(s, (p + 1) / 4, p);
    u64 q = p - 1;
    unsigned e = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++e;
    }
    u64 z = 2;
    while (jacobi_unchecked(z, p) != -1)
        ++z;
    u64 c = pow_mod(z, q, p);
    u64 x = pow_mod(s, (q + 1) / 2, p);
    u64 b = pow_mod(s, q, p);
    unsigned m = e;
    while (b != 1) {
        unsigned i = 0;
        u64 b2 = b;
        while (b2 != 1) {
            b2 = mul_mod(b2, b2, p);
            ++i;
        }
        u64 t = c;
        for (unsigned k = 0; k + i + 1 < m; ++k)
            t = mul_mod(t, t, p);
        x = mul_mod(x, t, p);
        c = mul_mod(t, t, p);
        b = mul_mod(b, c, p);
        m = i;
    }
    return x;
}

// Roots of y^2 = u mod p^k for p not dividing u, by Hensel lifting one exponent at a time.
inline std::vector<u64> hensel_roots(u64 u, u64 p, unsigned k)
{
    const u64 pk = ipow(p, k);
    u %= pk;
    if (jacobi_unchecked(u % p, p) != 1)
        return {};
    u64 y = tonelli_shanks(u % p, p);
    u64 mod = p;
    for (unsigned level = 2; level <= k; ++level) {
        mod *= p;
        // y <- y - (y^2 - u) / (2y)  mod p^level
        const u64 fy = sub_mod(mul_mod(y, y, mod), u % mod, mod);
        u64 inv2y = 0;
        try_inv_mod(mul_mod(2, y, mod), mod, inv2y);
        y = sub_mod(y, mul_mod(fy, inv2y, mod), mod);
    }
    const u64 other = (pk - y) % pk;
    return y < other ? std::vector<u64>{y, other} : std::vector<u64>{other, y};
}

} // namespace detail

inline SquareRootSet sqrt_mod_prime(i64 s, u64 p)
{
    require(p > 2 && (p & 1) == 1, "sqrt_mod_prime: modulus must be an odd prime");
    require(is_prime(p), "sqrt_mod_prime: modulus " + std::to_string(p) + " is not prime");
    SquareRootSet out{mod_reduce(s, p), FactoredModulus({{p, 1}}), {}};
    if (out.target == 0) {
        out.roots = {0};
        return out;
    }
    if (jacobi_unchecked(out.target, p) != 1)
        return out;
    const u64 x = detail::tonelli_shanks(out.target, p);
    out.roots = {std::min(x, p - x), std::max(x, p - x)};
    return out;
}

/// All roots mod p^e. Writes s = p^t u with p not dividing u: if t >= e every multiple of
/// p^ceil(e/2) is a root; otherwise roots exist iff t is even and u is a residue mod p.
inline SquareRootSet sqrt_mod_prime_power(i64 s, u64 p, unsigned e)
{
    require(p > 2 && (p & 1) == 1 && is_prime(p), "sqrt_mod_prime_power: base must be an odd prime");
    require(e >= 1, "sqrt_mod_prime_power: exponent must be positive");
    const u64 pe = ipow(p, e);
    SquareRootSet out{mod_reduce(s, pe), FactoredModulus({{p, e}}), {}};
    const u64 target = out.target;
    const unsigned t = valuation(target, p, e);
    if (t >= e) {
        const u64 step = ipow(p, (e + 1) / 2);
        for (u64 k = 0; k < pe; k += step)
            out.roots.push_back(k);
        return out;
    }
    if (t % 2 == 1)
        return out;
    const unsigned h = t / 2;
    const u64 ph = ipow(p, h);
    const u64 u = target / ipow(p, t);
    const unsigned reduced = e - t; // y^2 = u mod p^(e - 2h)
    const u64 p_reduced = ipow(p, reduced);
    for (u64 y0 : detail::hensel_roots(u, p, reduced)) {
        // k = p^h * y with y determined mod p^(e - h)
        for (u64 i = 0; i < ph; ++i)
            out.roots.push_back(static_cast<u64>((static_cast<u128>(ph) * (y0 + i * p_reduced)) % pe));
    }
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

/// The full collection of square roots of s modulo odd r, assembled by CRT from prime powers.
inline SquareRootSet sqrt_mod(i64 s, const FactoredModulus& r)
{
    require(r.is_odd(), "sqrt_mod: modulus must be odd, got " + std::to_string(r.value()));
    SquareRootSet out{mod_reduce(s, r.value()), r, {0}};
    if (r.value() == 1)
        return out;
    std::vector<u64> acc{0};
    u64 acc_mod = 1;
    for (const auto& f : r.factors()) {
        const auto local = sqrt_mod_prime_power(static_cast<i64>(out.target % f.value()), f.p, f.e);
        if (local.empty()) {
            out.roots.clear();
            return out;
        }
        std::vector<u64> next;
        next.reserve(acc.size() * local.size());
        for (u64 a : acc)
            for (u64 b : local.roots)
                next.push_back(crt_combine({ResidueClass{a, acc_mod}, ResidueClass{b, f.value()}}).value);
        acc = std::move(next);
        acc_mod *= f.value();
    }
    std::sort(acc.begin(), acc.end());
    out.roots = std::move(acc);
    return out;
}

inline SquareRootSet sqrt_mod(i64 s, u64 r) { return sqrt_mod(s, factorize(r)); }

} // namespace sqsieve
