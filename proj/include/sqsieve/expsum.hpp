#pragma once

// Complete mixed exponential sums
//
//   E_j(g0, g4, l1, a, f4, f5, f6, f7, v; r2)
//     = sum_{n mod r2} (j g0 l1 F(n) | r2) e((-j l1 a inv(4 g0 F(n)) + v n) / r2),
//   F(n) = (f5 g4 l1 + f6 n)(f7 g4 l1 - f4 n),
//
// their splitting over coprime factors of r2, the prime-power sums S(chi, g, f, p^m) and the
// stationary-phase data (t, critical points, multiplicities) that controls them.

#include "sqsieve/arith.hpp"
#include "sqsieve/compensated.hpp"
#include "sqsieve/rng.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace sqsieve {

struct ExpSumParams
{
    i64 g0 = 1, g4 = 1, l1 = 1, a = 0, f4 = 0, f5 = 1, f6 = 1, f7 = 1, v = 0;
    i64 j = 1;
    FactoredModulus modulus; // r2, odd
};

inline void validate(const ExpSumParams& s)
{
    const u64 r = s.modulus.value();
    require(s.modulus.is_odd(), "ExpSumParams: modulus must be odd, got " + std::to_string(r));
    require(std::gcd(mod_reduce(s.l1, r), r) == 1, "ExpSumParams: gcd(l1, modulus) must be 1");
    require(std::gcd(mod_reduce(s.g0, r), r) == 1, "ExpSumParams: gcd(g0, modulus) must be 1");
    require(std::gcd(mod_reduce(s.j, r), r) == 1, "ExpSumParams: gcd(j, modulus) must be 1");
}

inline Complex esum_eval(const ExpSumParams& s)
{
    validate(s);
    const u64 r = s.modulus.value();
    if (r == 1)
        return {1.0, 0.0};
    guard_operations(static_cast<double>(r), "esum_eval");
    auto red = [r](i64 x) { return mod_reduce(x, r); };
    const u64 g4l1 = mul_mod(red(s.g4), red(s.l1), r);
    const u64 jg0l1 = mul_mod(mul_mod(red(s.j), red(s.g0), r), red(s.l1), r);
    const u64 f4 = red(s.f4), f6 = red(s.f6), v = red(s.v);
    u64 inv4g0 = 0;
    try_inv_mod(mul_mod(4, red(s.g0), r), r, inv4g0);
    // K = j l1 a / (4 g0), so the phase numerator is v n - K inv(F(n))
    const u64 K = mul_mod(mul_mod(mul_mod(red(s.j), red(s.l1), r), red(s.a), r), inv4g0, r);

    u64 lin1 = mul_mod(red(s.f5), g4l1, r); // f5 g4 l1 + f6 n
    u64 lin2 = mul_mod(red(s.f7), g4l1, r); // f7 g4 l1 - f4 n
    u64 vn = 0;
    ComplexAccumulator acc;
    for (u64 n = 0; n < r; ++n) {
        const u64 Fn = mul_mod(lin1, lin2, r);
        const int sym = jacobi_unchecked(mul_mod(jg0l1, Fn, r), r);
        if (sym != 0) {
            u64 invF = 0;
            try_inv_mod(Fn, r, invF);
            const u64 phase = sub_mod(vn, mul_mod(K, invF, r), r);
            acc += static_cast<double>(sym) * unit_phase(phase, r);
        }
        lin1 = add_mod(lin1, f6, r);
        lin2 = sub_mod(lin2, f4, r);
        vn = add_mod(vn, v, r);
    }
    return acc.value();
}

/// The parameters of the factor over q_this in the splitting of modulus = q_this * q_other:
/// a -> a inv(q_other), f4 -> f4 q_other, f6 -> f6 q_other, all reduced mod q_this.
inline ExpSumParams restrict_params(const ExpSumParams& s, u64 q_this, u64 q_other)
{
    ExpSumParams out = s;
    out.modulus = factorize(q_this);
    if (q_this == 1)
        return out;
    auto red = [q_this](i64 x) { return mod_reduce(x, q_this); };
    const u64 qo = q_other % q_this;
    const u64 qo_inv = inv_mod(static_cast<i64>(qo), q_this).value;
    out.a = static_cast<i64>(mul_mod(red(s.a), qo_inv, q_this));
    out.f4 = static_cast<i64>(mul_mod(red(s.f4), qo, q_this));
    out.f6 = static_cast<i64>(mul_mod(red(s.f6), qo, q_this));
    for (i64* field : {&out.g0, &out.g4, &out.l1, &out.f5, &out.f7, &out.v, &out.j})
        *field = static_cast<i64>(red(*field));
    return out;
}

struct MultiplicativityCheck
{
    Complex lhs;
    Complex rhs;
    double max_deviation = 0.0;
};

inline MultiplicativityCheck esum_multiplicativity_check(const ExpSumParams& s, u64 q1, u64 q2)
{
    validate(s);
    require(q1 >= 1 && q2 >= 1 && (q1 & 1) && (q2 & 1), "esum_multiplicativity_check: q1, q2 must be odd");
    require(static_cast<u128>(q1) * q2 == s.modulus.value(), "esum_multiplicativity_check: q1 q2 must equal the modulus");
    require(std::gcd(q1, q2) == 1, "esum_multiplicativity_check: q1 and q2 are not coprime");
    MultiplicativityCheck out;
    out.lhs = esum_eval(s);
    out.rhs = esum_eval(restrict_params(s, q1, q2)) * esum_eval(restrict_params(s, q2, q1));
    out.max_deviation = std::abs(out.lhs - out.rhs);
    return out;
}

/// Product over the prime powers p^m || r2 of the factors with q = r2 / p^m.
inline Complex esum_prime_power_product(const ExpSumParams& s)
{
    validate(s);
    const u64 r = s.modulus.value();
    Complex prod{1.0, 0.0};
    for (const auto& f : s.modulus.factors()) {
        const u64 pm = f.value();
        prod *= esum_eval(restrict_params(s, pm, r / pm));
    }
    return prod;
}

// ---------------------------------------------------------------------------------------------
// Prime-power sums S(chi, g, f, p^m) with chi the Jacobi symbol mod p^m,
//   g(x) = j g0 l1 / F(x),  f(x) = -j l1 a / (4 g0 q F(x)) + v x,
//   F(x) = (f5 g4 l1 + f6 q x)(f7 g4 l1 - f4 q x).
// x with F(x) = 0 mod p are omitted.

namespace detail {

// Polynomial with coefficients reduced mod `mod`, lowest degree first.
using Poly = std::vector<u64>;

inline Poly poly_mul(const Poly& x, const Poly& y, u64 mod)
{
    Poly out(x.size() + y.size() - 1, 0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < y.size(); ++k)
            out[i + k] = add_mod(out[i + k], mul_mod(x[i], y[k], mod), mod);
    return out;
}

inline Poly poly_add(Poly x, const Poly& y, u64 mod)
{
    if (x.size() < y.size())
        x.resize(y.size(), 0);
    for (std::size_t i = 0; i < y.size(); ++i)
        x[i] = add_mod(x[i], y[i], mod);
    return x;
}

inline Poly poly_scale(Poly x, u64 c, u64 mod)
{
    for (auto& coef : x)
        coef = mul_mod(coef, c, mod);
    return x;
}

inline Poly poly_derivative(const Poly& x, u64 mod)
{
    if (x.size() <= 1)
        return {0};
    Poly out(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i - 1] = mul_mod(x[i], i % mod, mod);
    return out;
}

inline u64 poly_eval(const Poly& x, u64 at, u64 mod)
{
    u64 acc = 0;
    for (std::size_t i = x.size(); i-- > 0;)
        acc = add_mod(mul_mod(acc, at, mod), x[i], mod);
    return acc;
}

inline unsigned poly_valuation(const Poly& x, u64 p, unsigned cap)
{
    unsigned v = cap;
    for (u64 coef : x)
        v = std::min(v, valuation(coef, p, cap));
    return v;
}

inline u64 binomial_mod(unsigned n, unsigned k, u64 p)
{
    u64 c = 1;
    for (unsigned i = 0; i < k; ++i)
        c = c * (n - i) / (i + 1); // n <= 4, exact in integers
    return c % p;
}

// Order of vanishing of x at alpha over F_p, read off the Taylor coefficients
// sum_i C(i, k) x_i alpha^(i - k); capped at deg + 1 for the zero polynomial.
inline unsigned vanishing_order(const Poly& x, u64 alpha, u64 p)
{
    for (unsigned k = 0; k < x.size(); ++k) {
        u64 coef = 0;
        for (unsigned i = k; i < x.size(); ++i)
            coef = add_mod(coef, mul_mod(mul_mod(binomial_mod(i, k, p), x[i], p), pow_mod(alpha, i - k, p), p), p);
        if (coef != 0)
            return k;
    }
    return static_cast<unsigned>(x.size());
}

struct LocalSetup
{
    u64 p = 0;
    unsigned m = 0;
    u64 pm = 1;
    u64 q = 1;
    Poly F; // coefficients mod p^m
};

inline LocalSetup local_setup(u64 p, unsigned m, const ExpSumParams& s, i64 q)
{
    require(p > 2 && is_prime(p), "prime-power sum: p must be an odd prime");
    require(m >= 1, "prime-power sum: exponent must be positive");
    const u64 pm = ipow(p, m);
    require(static_cast<double>(pm) <= kMaxOperations && pm < (u64{1} << 40), "prime-power sum: p^m too large");
    LocalSetup ls{p, m, pm, mod_reduce(q, pm), {}};
    auto red = [pm](i64 x) { return mod_reduce(x, pm); };
    require(ls.q % p != 0, "prime-power sum: q must be prime to p");
    for (i64 x : {s.j, s.g0, s.l1})
        require(red(x) % p != 0, "prime-power sum: j, g0 and l1 must be prime to p");
    const u64 g4l1 = mul_mod(red(s.g4), red(s.l1), pm);
    const Poly lin1{mul_mod(red(s.f5), g4l1, pm), mul_mod(red(s.f6), ls.q, pm)};
    const Poly lin2{mul_mod(red(s.f7), g4l1, pm), sub_mod(0, mul_mod(red(s.f4), ls.q, pm), pm)};
    ls.F = poly_mul(lin1, lin2, pm);
    return ls;
}

// Sum over x = start, start + step, ..., below p^m (x = 0 stands for x = p^m).
inline Complex local_sum(const LocalSetup& ls, const ExpSumParams& s, u64 start, u64 step)
{
    const u64 pm = ls.pm;
    auto red = [pm](i64 x) { return mod_reduce(x, pm); };
    const u64 jg0l1 = mul_mod(mul_mod(red(s.j), red(s.g0), pm), red(s.l1), pm);
    u64 inv4g0q = 0;
    try_inv_mod(mul_mod(mul_mod(4, red(s.g0), pm), ls.q, pm), pm, inv4g0q);
    const u64 jl1a = mul_mod(mul_mod(red(s.j), red(s.l1), pm), red(s.a), pm);
    const u64 v = red(s.v);
    ComplexAccumulator acc;
    for (u64 x = start; x < pm; x += step) {
        const u64 Fx = poly_eval(ls.F, x, pm);
        u64 invF = 0;
        if (Fx % ls.p == 0 || !try_inv_mod(Fx, pm, invF))
            continue;
        const int chi = jacobi_unchecked(mul_mod(jg0l1, invF, pm), pm);
        const u64 fx = sub_mod(mul_mod(v, x, pm), mul_mod(mul_mod(jl1a, inv4g0q, pm), invF, pm), pm);
        acc += static_cast<double>(chi) * unit_phase(fx, pm);
    }
    return acc.value();
}

} // namespace detail

/// S(chi, g, f, p^m) summed over x in [1, p^m]. Coincides with E_j(a inv(q), f4 q, f5, f6 q,
/// f7, v; p^m); s.modulus is ignored.
inline Complex mixed_sum_eval(u64 p, unsigned m, const ExpSumParams& s, i64 q = 1)
{
    const auto ls = detail::local_setup(p, m, s, q);
    return detail::local_sum(ls, s, 0, 1);
}

/// S_alpha: the part of S(chi, g, f, p^m) over x = alpha mod p.
inline Complex partial_sum_alpha(u64 p, unsigned m, const ExpSumParams& s, u64 alpha, i64 q = 1)
{
    require(m >= 2, "partial_sum_alpha: exponent must be at least 2");
    require(alpha < p, "partial_sum_alpha: alpha must be a residue mod p");
    const auto ls = detail::local_setup(p, m, s, q);
    return detail::local_sum(ls, s, alpha, p);
}

/// All S_alpha for alpha = 0 .. p-1 in one pass.
inline std::vector<Complex> partial_sums(u64 p, unsigned m, const ExpSumParams& s, i64 q = 1)
{
    require(m >= 2, "partial_sums: exponent must be at least 2");
    const auto ls = detail::local_setup(p, m, s, q);
    std::vector<Complex> out(p);
    for (u64 alpha = 0; alpha < p; ++alpha)
        out[alpha] = detail::local_sum(ls, s, alpha, p);
    return out;
}

/// 3 sqrt(p) gcd(p, g4)^(1/2).
inline double perelmuter_bound(u64 p, i64 g4)
{
    const u64 d = std::gcd(mod_reduce(g4, p), p);
    return 3.0 * std::sqrt(static_cast<double>(p)) * std::sqrt(static_cast<double>(d));
}

// ---------------------------------------------------------------------------------------------
// Stationary phase data.

/// Least primitive root mod p, bumped by p when it fails to generate mod p^2.
inline u64 primitive_root_mod_p2(u64 p)
{
    require(p > 2 && is_prime(p), "primitive_root_mod_p2: p must be an odd prime");
    const auto phi_factors = factorize(p - 1).factors();
    auto generates_mod_p = [&](u64 g) {
        for (const auto& f : phi_factors)
            if (pow_mod(g, (p - 1) / f.p, p) == 1)
                return false;
        return true;
    };
    u64 g = 2;
    while (!generates_mod_p(g))
        ++g;
    const u64 p2 = p * p;
    if (pow_mod(g, p - 1, p2) == 1)
        g += p;
    return g;
}

/// True iff g has order p(p - 1) mod p^2.
inline bool generates_units_mod_p2(u64 g, u64 p)
{
    const u64 p2 = p * p;
    const u64 order = p * (p - 1);
    if (g % p == 0 || pow_mod(g, order, p2) != 1)
        return false;
    std::vector<u64> primes{p};
    for (const auto& f : factorize(p - 1).factors())
        primes.push_back(f.p);
    for (u64 l : primes)
        if (pow_mod(g, order / l, p2) == 1)
            return false;
    return true;
}

enum class CochraneRegime
{
    EmptySum,   // F vanishes identically mod p
    Trivial,    // t' >= m
    TopLevel,   // t' = m - 1
    Stationary, // t' <= m - 2: only critical points contribute
};

struct CriticalPoint
{
    u64 alpha = 0;
    unsigned multiplicity = 0;
};

struct CochraneContext
{
    u64 p = 0;
    unsigned m = 0;
    u64 q = 1;
    u64 primitive_root = 0; // mod p^2
    u64 r_resid = 0;        // primitive_root^(p-1) = 1 + r_resid p mod p^2
    u64 R_mod_p = 0;
    u64 c = 0;              // chi(g^k) = e(c k / phi(p^m))
    unsigned ord_F = 0;
    unsigned ord_F_prime = 0;
    unsigned ord_f_prime = 0;
    unsigned t = 0;       // min(ord f', ord c g'), capped at m
    unsigned t_prime = 0; // min(ord a, ord v), capped at m
    CochraneRegime regime = CochraneRegime::EmptySum;
    std::vector<u64> critical_numerator; // mod p, lowest degree first
    std::vector<CriticalPoint> critical_points;

    bool is_critical(u64 alpha) const
    {
        for (const auto& cp : critical_points)
            if (cp.alpha == alpha)
                return true;
        return false;
    }

    /// lambda_alpha p^(t/(nu+1)) p^(m(1 - 1/(nu+1))).
    double alpha_bound(unsigned nu) const
    {
        const double lambda = std::min(static_cast<double>(nu), std::pow(1.25, 5));
        const double e = 1.0 / (nu + 1.0);
        const double pd = static_cast<double>(p);
        return lambda * std::pow(pd, t * e) * std::pow(pd, m * (1.0 - e));
    }
};

inline CochraneContext critical_points(u64 p, unsigned m, const ExpSumParams& s, i64 q = 1,
                                       std::optional<u64> primitive_root = std::nullopt)
{
    using namespace detail;
    const auto ls = local_setup(p, m, s, q);
    const u64 pm = ls.pm;
    auto red = [pm](i64 x) { return mod_reduce(x, pm); };

    CochraneContext ctx;
    ctx.p = p;
    ctx.m = m;
    ctx.q = ls.q;
    ctx.primitive_root = primitive_root ? *primitive_root % (p * p) : primitive_root_mod_p2(p);
    require(generates_units_mod_p2(ctx.primitive_root, p), "critical_points: supplied root does not generate mod p^2");
    ctx.r_resid = (pow_mod(ctx.primitive_root, p - 1, p * p) - 1) / p;
    ctx.R_mod_p = ctx.r_resid % p;
    const u64 phi = pm / p * (p - 1);
    // The Jacobi symbol mod p^m is the quadratic character for odd m and principal for even m.
    ctx.c = (m % 2 == 1) ? phi / 2 : phi;

    ctx.ord_F = poly_valuation(ls.F, p, m);
    const Poly dF = poly_derivative(ls.F, pm);
    ctx.ord_F_prime = poly_valuation(dF, p, m);
    ctx.t_prime = std::min(valuation(red(s.a), p, m), valuation(red(s.v), p, m));

    // numerator of f' over the unit denominator 4 g0 q F^2: j l1 a F' + 4 g0 q v F^2
    const u64 jl1 = mul_mod(red(s.j), red(s.l1), pm);
    const Poly Pf = poly_add(poly_scale(dF, mul_mod(jl1, red(s.a), pm), pm),
                             poly_scale(poly_mul(ls.F, ls.F, pm),
                                        mul_mod(mul_mod(mul_mod(4, red(s.g0), pm), ls.q, pm), red(s.v), pm), pm),
                             pm);
    ctx.ord_f_prime = poly_valuation(Pf, p, m);
    // ord_p(c) = m - 1 for both parities; g' = -j g0 l1 F' / F^2
    ctx.t = std::min<unsigned>(ctx.ord_f_prime, std::min<unsigned>(m, m - 1 + ctx.ord_F_prime));

    if (ctx.ord_F > 0) {
        ctx.regime = CochraneRegime::EmptySum;
        return ctx;
    }
    if (ctx.t_prime >= m) {
        ctx.regime = CochraneRegime::Trivial;
        return ctx;
    }
    if (ctx.t_prime == m - 1) {
        ctx.regime = CochraneRegime::TopLevel;
        return ctx;
    }
    ctx.regime = CochraneRegime::Stationary;
    if (ctx.t > m - 2)
        return ctx; // no stationary structure to extract

    // p^{-t}(R g f' + c g') mod p: the c g' part carries p^{m-1-t} and drops out, leaving
    // R j l1 (P_f / p^t) over a unit denominator.
    const u64 pt = ipow(p, ctx.t);
    const u64 scale = mul_mod(ctx.R_mod_p, jl1 % p, p);
    Poly C(Pf.size());
    for (std::size_t i = 0; i < Pf.size(); ++i)
        C[i] = mul_mod((Pf[i] / pt) % p, scale, p);
    while (C.size() > 1 && C.back() == 0)
        C.pop_back();
    ctx.critical_numerator = C;

    for (u64 alpha = 0; alpha < p; ++alpha) {
        if (poly_eval(ls.F, alpha, pm) % p == 0)
            continue;
        if (poly_eval(C, alpha, p) != 0)
            continue;
        ctx.critical_points.push_back({alpha, vanishing_order(C, alpha, p)});
    }
    return ctx;
}

/// The cubic congruence F'(x)(j l1 a1 / (4 g0 q) - v1 F(x)) = 0 mod p as printed in the source
/// derivation, lowest degree first. It disagrees with the numerator used by critical_points
/// whenever v1 != 0 mod p; kept so the discrepancy can be exhibited.
inline std::vector<u64> paper_critical_cubic(u64 p, unsigned m, const ExpSumParams& s, i64 q = 1)
{
    using namespace detail;
    const auto ls = local_setup(p, m, s, q);
    const unsigned t = std::min(valuation(mod_reduce(s.a, ls.pm), p, m), valuation(mod_reduce(s.v, ls.pm), p, m));
    require(t + 2 <= m, "paper_critical_cubic: needs t' <= m - 2");
    const u64 pt = ipow(p, t);
    const u64 a1 = (mod_reduce(s.a, ls.pm) / pt) % p;
    const u64 v1 = (mod_reduce(s.v, ls.pm) / pt) % p;
    Poly Fp(ls.F.size());
    for (std::size_t i = 0; i < Fp.size(); ++i)
        Fp[i] = ls.F[i] % p;
    u64 inv4g0q = 0;
    try_inv_mod(mul_mod(mul_mod(4, mod_reduce(s.g0, p), p), ls.q % p, p), p, inv4g0q);
    const u64 K = mul_mod(mul_mod(mul_mod(mod_reduce(s.j, p), mod_reduce(s.l1, p), p), a1, p), inv4g0q, p);
    const Poly inner = poly_add(Poly{K}, poly_scale(Fp, sub_mod(0, v1, p), p), p);
    Poly out = poly_mul(poly_derivative(Fp, p), inner, p);
    while (out.size() > 1 && out.back() == 0)
        out.pop_back();
    return out;
}

// ---------------------------------------------------------------------------------------------

struct BoundRatio
{
    double measured = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};

/// |E_j| against g4^(1/2) r3^(1/2) gcd(a, v, r4)^(1/4) r4^(3/4), with r3 and r4 the squarefree
/// and squarefull parts of r2. The implied constant and r2^eps are left in the ratio.
inline BoundRatio esum_bound_check(const ExpSumParams& s)
{
    require(s.g4 >= 1, "esum_bound_check: g4 must be positive");
    BoundRatio out;
    out.measured = std::abs(esum_eval(s));
    const u64 r3 = s.modulus.squarefree_part();
    const u64 r4 = s.modulus.squarefull_part();
    const u64 d = std::gcd(std::gcd(mod_reduce(s.a, r4), mod_reduce(s.v, r4)), r4);
    out.bound = std::sqrt(static_cast<double>(s.g4)) * std::sqrt(static_cast<double>(r3)) *
                std::pow(static_cast<double>(d), 0.25) * std::pow(static_cast<double>(r4), 0.75);
    out.ratio = out.measured / out.bound;
    return out;
}

/// Seeded parameters satisfying f4 f5 + f6 f7 = 1 with j, g0, l1 units mod the modulus.
inline ExpSumParams random_structured_params(SplitMix64& rng, const FactoredModulus& modulus)
{
    const u64 r = modulus.value();
    auto unit = [&]() {
        if (r == 1)
            return i64{1};
        for (;;) {
            const i64 x = rng.between(1, static_cast<i64>(r) - 1);
            if (std::gcd(static_cast<u64>(x), r) == 1)
                return x;
        }
    };
    ExpSumParams s;
    s.modulus = modulus;
    s.j = unit();
    s.g0 = unit();
    s.l1 = unit();
    s.g4 = rng.between(1, std::max<i64>(1, static_cast<i64>(r)));
    i64 f4, f6;
    do {
        f4 = rng.between(1, 60);
        f6 = rng.between(1, 60);
    } while (std::gcd(f4, f6) != 1);
    const i64 f5 = (f6 == 1 ? 0 : static_cast<i64>(inv_mod(f4, static_cast<u64>(f6)).value)) + rng.between(0, 3) * f6;
    s.f4 = f4;
    s.f5 = f5;
    s.f6 = f6;
    s.f7 = (1 - f4 * f5) / f6;
    s.a = rng.between(0, static_cast<i64>(r) - 1 + (r == 1));
    s.v = rng.between(0, static_cast<i64>(r) - 1 + (r == 1));
    return s;
}

} // namespace sqsieve
