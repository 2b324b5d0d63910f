#pragma once

// Slow, obviously-correct reference computations. Nothing here calls into the library's
// arithmetic: factorization is trial division, Legendre symbols come from Euler's criterion,
// inverses from Euler's theorem or exhaustive search, and every sum is a plain loop.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;
using cplx = std::complex<long double>;

inline u64 md(i128 x, u64 m)
{
    i128 r = x % static_cast<i128>(m);
    return static_cast<u64>(r < 0 ? r + m : r);
}

inline std::vector<std::pair<u64, unsigned>> trial_factor(u64 n)
{
    std::vector<std::pair<u64, unsigned>> out;
    for (u64 p = 2; p * p <= n; ++p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e)
            out.push_back({p, e});
    }
    if (n > 1)
        out.push_back({n, 1});
    return out;
}

inline u64 power(u64 b, u64 e, u64 m)
{
    u64 r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1)
            r = static_cast<u64>(static_cast<i128>(r) * b % m);
        b = static_cast<u64>(static_cast<i128>(b) * b % m);
        e >>= 1;
    }
    return r;
}

inline int legendre_euler(i64 a, u64 p)
{
    const u64 x = power(md(a, p), (p - 1) / 2, p);
    return x == 0 ? 0 : (x == 1 ? 1 : -1);
}

inline int jacobi(i64 a, u64 c)
{
    int s = 1;
    for (auto [p, e] : trial_factor(c))
        for (unsigned k = 0; k < e; ++k)
            s *= legendre_euler(a, p);
    return s;
}

inline u64 phi(u64 n)
{
    u64 out = n;
    for (auto [p, e] : trial_factor(n))
        out = out / p * (p - 1);
    return out;
}

/// Inverse via Euler's theorem; caller guarantees gcd(x, m) = 1.
inline u64 inverse_euler(i64 x, u64 m)
{
    if (m == 1)
        return 0;
    return power(md(x, m), phi(m) - 1, m);
}

inline bool inverse_search(i64 x, u64 m, u64& out)
{
    for (u64 y = 0; y < m; ++y)
        if (md(static_cast<i128>(x) * y, m) == 1 % m) {
            out = y;
            return true;
        }
    return false;
}

inline std::vector<u64> roots(i64 s, u64 r)
{
    std::vector<u64> out;
    const u64 t = md(s, r);
    for (u64 k = 0; k < r; ++k)
        if (k * k % r == t)
            out.push_back(k);
    return out;
}

inline cplx e(long double x) { return std::polar(1.0L, 2.0L * std::numbers::pi_v<long double> * x); }

inline cplx e_mod(u64 k, u64 n) { return e(static_cast<long double>(k % n) / static_cast<long double>(n)); }

inline cplx gauss(i64 a, i64 b, u64 c)
{
    cplx s = 0;
    for (u64 n = 0; n < c; ++n)
        s += e_mod(md(static_cast<i128>(a) * n * n + static_cast<i128>(b) * n, c), c);
    return s;
}

struct ESumFields
{
    i64 g0, g4, l1, a, f4, f5, f6, f7, v, j;
};

/// The defining sum over n mod r2, symbol-zero terms dropped.
inline cplx esum(const ESumFields& f, u64 r)
{
    if (r == 1)
        return 1;
    cplx s = 0;
    for (u64 n = 0; n < r; ++n) {
        const i128 F = static_cast<i128>(md(static_cast<i128>(f.f5) * f.g4 * f.l1 + static_cast<i128>(f.f6) * n, r)) *
                       md(static_cast<i128>(f.f7) * f.g4 * f.l1 - static_cast<i128>(f.f4) * n, r);
        const u64 Fr = md(F, r);
        const int sym = jacobi(static_cast<i64>(md(static_cast<i128>(md(static_cast<i128>(f.j) * f.g0 * f.l1, r)) * Fr, r)), r);
        if (sym == 0)
            continue;
        const u64 inv = inverse_euler(static_cast<i64>(md(static_cast<i128>(4) * md(f.g0, r) * Fr, r)), r);
        const u64 phase = md(-static_cast<i128>(md(static_cast<i128>(f.j) * f.l1 * md(f.a, r), r)) * inv + static_cast<i128>(f.v) * n, r);
        s += static_cast<long double>(sym) * e_mod(phase, r);
    }
    return s;
}

/// S(chi, g, f, p^m) summed over x = 1 .. p^m with g = j g0 l1 / F, f = -j l1 a / (4 g0 q F) + v x.
inline cplx mixed_sum(const ESumFields& f, u64 p, unsigned m, i64 q, u64 alpha_filter = ~u64{0})
{
    u64 pm = 1;
    for (unsigned k = 0; k < m; ++k)
        pm *= p;
    cplx s = 0;
    for (u64 x = 1; x <= pm; ++x) {
        if (alpha_filter != ~u64{0} && x % p != alpha_filter)
            continue;
        const u64 F = md(static_cast<i128>(md(static_cast<i128>(f.f5) * f.g4 * f.l1 + static_cast<i128>(f.f6) * q * x, pm)) *
                             md(static_cast<i128>(f.f7) * f.g4 * f.l1 - static_cast<i128>(f.f4) * q * x, pm),
                         pm);
        if (F % p == 0)
            continue;
        const u64 invF = inverse_euler(static_cast<i64>(F), pm);
        const u64 g = md(static_cast<i128>(md(static_cast<i128>(f.j) * f.g0 * f.l1, pm)) * invF, pm);
        const u64 inv4g0q = inverse_euler(static_cast<i64>(md(static_cast<i128>(4) * f.g0 * q, pm)), pm);
        const u64 c = md(static_cast<i128>(md(static_cast<i128>(f.j) * f.l1 * md(f.a, pm), pm)) * inv4g0q, pm);
        const u64 fx = md(-static_cast<i128>(md(static_cast<i128>(c) * invF, pm)) + static_cast<i128>(md(f.v, pm)) * x, pm);
        s += static_cast<long double>(jacobi(static_cast<i64>(g), pm)) * e_mod(fx, pm);
    }
    return s;
}

inline u64 gcd_average(u64 r, u64 M)
{
    u64 s = 0;
    for (u64 m = 1; m <= M; ++m)
        s += std::gcd(r, m);
    return s;
}

/// Exact |a/q^2 - an/ad| <= dn/dd, all denominators positive.
inline u64 farey(u64 Q, i128 an, i128 ad, i128 dn, i128 dd)
{
    u64 count = 0;
    for (u64 q = 1; q <= Q; ++q) {
        const i128 q2 = static_cast<i128>(q) * q;
        const long double centre = static_cast<long double>(an) / ad * q2;
        const long double width = static_cast<long double>(dn) / dd * q2;
        for (i128 a = static_cast<i128>(std::floor(centre - width)) - 2; a <= static_cast<i128>(std::ceil(centre + width)) + 2; ++a) {
            i128 diff = a * ad - q2 * an; // (a/q^2 - alpha) q^2 ad
            if (diff < 0)
                diff = -diff;
            if (diff * dd <= dn * q2 * ad && std::gcd(static_cast<u64>(a < 0 ? -a : a), q) == 1)
                ++count;
        }
    }
    return count;
}

/// sum over moduli d(q) for q <= Q and reduced a mod d(q) of |sum_n a_n e(n a / d(q))|^2.
template <class ModulusOf>
long double quadform(u64 Q, i64 M, const std::vector<std::complex<double>>& coeffs, ModulusOf modulus_of)
{
    long double total = 0;
    for (u64 q = 1; q <= Q; ++q) {
        const u64 d = modulus_of(q);
        for (u64 a = 1; a <= d; ++a) {
            if (std::gcd(a, q) != 1)
                continue;
            cplx s = 0;
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                const i64 n = M + 1 + static_cast<i64>(i);
                s += cplx(coeffs[i].real(), coeffs[i].imag()) * e_mod(md(static_cast<i128>(n) * a, d), d);
            }
            total += std::norm(s);
        }
    }
    return total;
}

} // namespace oracle
