#pragma once

// Exact 64-bit modular arithmetic: residues, inverses, Jacobi symbols, CRT,
// factorization (trial division + Pollard-Brent) and gcd averages.

#include "sqsieve/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace sqsieve {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

inline constexpr u64 kMaxModulus = u64{1} << 62;

/// Least non-negative residue of x modulo m.
constexpr u64 mod_reduce(i64 x, u64 m)
{
    if (x >= 0)
        return static_cast<u64>(x) % m;
    const u64 r = static_cast<u64>(-(x + 1)) % m; // avoids overflow at INT64_MIN
    return m - 1 - r;
}

constexpr u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>((static_cast<u128>(a) * b) % m); }

constexpr u64 add_mod(u64 a, u64 b, u64 m)
{
    const u128 s = static_cast<u128>(a) + b;
    return static_cast<u64>(s % m);
}

constexpr u64 sub_mod(u64 a, u64 b, u64 m)
{
    a %= m;
    b %= m;
    return a >= b ? a - b : m - (b - a);
}

constexpr u64 pow_mod(u64 base, u64 exp, u64 m)
{
    if (m == 1)
        return 0;
    u64 result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1)
            result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

constexpr u64 ipow(u64 base, unsigned exp)
{
    u64 r = 1;
    for (unsigned i = 0; i < exp; ++i)
        r *= base;
    return r;
}

/// p-adic valuation of x, capped at `cap` (x = 0 has valuation `cap`).
constexpr unsigned valuation(u64 x, u64 p, unsigned cap)
{
    if (x == 0)
        return cap;
    unsigned k = 0;
    while (k < cap && x % p == 0) {
        x /= p;
        ++k;
    }
    return k;
}

/// An integer residue with 0 <= value < modulus.
struct ResidueClass
{
    u64 value = 0;
    u64 modulus = 1;

    static ResidueClass of(i64 x, u64 m)
    {
        require(m >= 1, "ResidueClass: modulus must be positive");
        return {mod_reduce(x, m), m};
    }

    friend bool operator==(const ResidueClass&, const ResidueClass&) = default;
    friend auto operator<=>(const ResidueClass&, const ResidueClass&) = default;
};

namespace detail {

struct ExtGcd
{
    i64 g, x, y;
};

// a*x + b*y = g for 0 <= a, b < 2^62, so every Bezout coefficient fits in 64 bits.
inline ExtGcd ext_gcd(i64 a, i64 b)
{
    i64 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        const i64 q = old_r / r;
        i64 tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    return {old_r, old_s, old_t};
}

} // namespace detail

/// Writes the inverse of x mod m to `out`; returns false when gcd(x, m) > 1.
inline bool try_inv_mod(u64 x, u64 m, u64& out)
{
    if (m == 1) {
        out = 0;
        return true;
    }
    const auto eg = detail::ext_gcd(static_cast<i64>(x % m), static_cast<i64>(m));
    if (eg.g != 1)
        return false;
    i64 v = eg.x % static_cast<i64>(m);
    if (v < 0)
        v += static_cast<i64>(m);
    out = static_cast<u64>(v);
    return true;
}

inline ResidueClass inv_mod(i64 x, u64 m)
{
    require(m >= 1, "inv_mod: modulus must be positive");
    u64 r = 0;
    if (!try_inv_mod(mod_reduce(x, m), m, r))
        throw NoInverseError("inv_mod: " + std::to_string(x) + " has no inverse modulo " + std::to_string(m));
    return {r, m};
}

/// Jacobi symbol (a | c) for odd c >= 1, by the binary reciprocity loop.
inline int jacobi_unchecked(u64 a, u64 c)
{
    a %= c;
    int result = 1;
    while (a != 0) {
        const int tz = std::countr_zero(a);
        a >>= tz;
        if ((tz & 1) && ((c & 7) == 3 || (c & 7) == 5))
            result = -result;
        std::swap(a, c);
        if ((a & 3) == 3 && (c & 3) == 3)
            result = -result;
        a %= c;
    }
    return c == 1 ? result : 0;
}

inline int jacobi(i64 a, u64 c)
{
    require(c >= 1 && (c & 1) == 1, "jacobi: modulus must be odd and positive, got " + std::to_string(c));
    return jacobi_unchecked(mod_reduce(a, c), c);
}

/// Combines residues with pairwise coprime moduli into the unique residue modulo their product.
inline ResidueClass crt_combine(std::span<const ResidueClass> residues)
{
    ResidueClass acc{0, 1};
    for (const auto& rc : residues) {
        require(rc.modulus >= 1 && rc.value < rc.modulus, "crt_combine: malformed residue");
        require(std::gcd(acc.modulus, rc.modulus) == 1,
                "crt_combine: moduli " + std::to_string(acc.modulus) + " and " + std::to_string(rc.modulus) +
                    " are not coprime");
        const u128 prod = static_cast<u128>(acc.modulus) * rc.modulus;
        require(prod <= kMaxModulus, "crt_combine: combined modulus exceeds 2^62");
        const u64 m = static_cast<u64>(prod);
        u64 inv = 0;
        try_inv_mod(acc.modulus % rc.modulus, rc.modulus, inv);
        // x = acc.value + acc.modulus * ((rc.value - acc.value) * inv mod rc.modulus)
        const u64 diff = sub_mod(rc.value % rc.modulus, acc.value % rc.modulus, rc.modulus);
        const u64 k = mul_mod(diff, inv, rc.modulus);
        acc = {static_cast<u64>((static_cast<u128>(acc.modulus) * k + acc.value) % m), m};
    }
    return acc;
}

inline ResidueClass crt_combine(std::initializer_list<ResidueClass> residues)
{
    return crt_combine(std::span<const ResidueClass>(residues.begin(), residues.size()));
}

// ---------------------------------------------------------------------------
// Primality and factorization

inline bool is_prime(u64 n)
{
    if (n < 2)
        return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0)
            return n == p;
    }
    u64 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // deterministic witness set for 64-bit inputs
    for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
        a %= n;
        if (a == 0)
            continue;
        u64 x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool composite = true;
        for (unsigned i = 1; i < s; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite)
            return false;
    }
    return true;
}

namespace detail {

// Brent's cycle detection on x -> x^2 + c; returns a nontrivial factor of composite odd n.
inline u64 pollard_brent(u64 n)
{
    for (u64 c = 1;; ++c) {
        u64 y = 2, x = 2, q = 1, g = 1, ys = 2;
        const u64 m = 128;
        u64 r = 1;
        auto f = [&](u64 v) { return add_mod(mul_mod(v, v, n), c, n); };
        do {
            x = y;
            for (u64 i = 0; i < r; ++i)
                y = f(y);
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mul_mod(q, x > y ? x - y : y - x, n);
                }
                g = std::gcd(q, n);
                k += m;
            } while (k < r && g == 1);
            r <<= 1;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n)
            return g;
    }
}

inline void factor_into(u64 n, std::vector<u64>& primes)
{
    if (n == 1)
        return;
    if (is_prime(n)) {
        primes.push_back(n);
        return;
    }
    const u64 d = pollard_brent(n);
    factor_into(d, primes);
    factor_into(n / d, primes);
}

} // namespace detail

struct PrimePower
{
    u64 p = 0;
    unsigned e = 0;

    u64 value() const { return ipow(p, e); }
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// A positive integer together with its prime factorization and squarefree/squarefull split.
class FactoredModulus
{
public:
    FactoredModulus() = default;

    /// Builds from an explicit factorization; primes must be distinct.
    explicit FactoredModulus(std::vector<PrimePower> factors) : factors_(std::move(factors))
    {
        std::sort(factors_.begin(), factors_.end(), [](auto& a, auto& b) { return a.p < b.p; });
        n_ = 1;
        s0_ = 1;
        s1_ = 1;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const auto& f = factors_[i];
            require(f.e >= 1 && is_prime(f.p), "FactoredModulus: invalid prime power");
            require(i == 0 || factors_[i - 1].p != f.p, "FactoredModulus: repeated prime");
            const u64 pe = f.value();
            require(static_cast<u128>(n_) * pe <= (u128{1} << 63), "FactoredModulus: value exceeds 2^63");
            n_ *= pe;
            (f.e == 1 ? s0_ : s1_) *= pe;
        }
    }

    u64 value() const { return n_; }
    const std::vector<PrimePower>& factors() const& { return factors_; }
    std::vector<PrimePower> factors() && { return std::move(factors_); }
    u64 squarefree_part() const { return s0_; }
    u64 squarefull_part() const { return s1_; }
    bool is_odd() const { return (n_ & 1) == 1; }
    bool is_squarefree() const { return s1_ == 1; }

    u64 divisor_count() const
    {
        u64 d = 1;
        for (const auto& f : factors_)
            d *= f.e + 1;
        return d;
    }

    u64 euler_phi() const
    {
        u64 phi = 1;
        for (const auto& f : factors_)
            phi *= ipow(f.p, f.e - 1) * (f.p - 1);
        return phi;
    }

    u64 divisor_sum() const
    {
        u64 s = 1;
        for (const auto& f : factors_)
            s *= (ipow(f.p, f.e + 1) - 1) / (f.p - 1);
        return s;
    }

    std::vector<u64> divisors() const
    {
        std::vector<u64> ds{1};
        for (const auto& f : factors_) {
            const std::size_t base = ds.size();
            u64 pk = 1;
            for (unsigned k = 1; k <= f.e; ++k) {
                pk *= f.p;
                for (std::size_t i = 0; i < base; ++i)
                    ds.push_back(ds[i] * pk);
            }
        }
        std::sort(ds.begin(), ds.end());
        return ds;
    }

    friend bool operator==(const FactoredModulus& a, const FactoredModulus& b) { return a.factors_ == b.factors_; }

private:
    u64 n_ = 1;
    std::vector<PrimePower> factors_;
    u64 s0_ = 1;
    u64 s1_ = 1;
};

inline FactoredModulus factorize(u64 n)
{
    require(n >= 1, "factorize: n must be positive");
    require(n <= (u64{1} << 63), "factorize: n exceeds 2^63");
    std::vector<PrimePower> out;
    auto push = [&](u64 p) {
        if (!out.empty() && out.back().p == p)
            ++out.back().e;
        else
            out.push_back({p, 1});
    };
    for (u64 p = 2; p <= 1'000'000 && p * p <= n; p += (p == 2 ? 1 : 2)) {
        while (n % p == 0) {
            push(p);
            n /= p;
        }
    }
    if (n > 1) {
        std::vector<u64> primes;
        detail::factor_into(n, primes);
        std::sort(primes.begin(), primes.end());
        for (u64 p : primes)
            push(p);
    }
    // trial-division primes are ascending and all below the Pollard primes, so `out` is sorted
    return FactoredModulus(std::move(out));
}

/// Sum over 1 <= m <= M of gcd(r, m), via the divisor identity sum_{d | r} phi(d) floor(M / d).
inline u64 gcd_average(const FactoredModulus& r, u64 M)
{
    u64 total = 0;
    for (u64 d : r.divisors()) {
        const u64 phi = factorize(d).euler_phi();
        total += phi * (M / d);
    }
    return total;
}

inline u64 gcd_average(u64 r, u64 M)
{
    require(r >= 1 && M >= 1, "gcd_average: r and M must be positive");
    return gcd_average(factorize(r), M);
}

} // namespace sqsieve
