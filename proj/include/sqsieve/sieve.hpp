#pragma once

// Large sieve with square moduli: Farey counts P(alpha) over fractions a/q^2, the quadratic
// form and its classical comparison, the parameter choices that feed the bilinear estimate,
// and the resulting bound formulas.

#include "sqsieve/arith.hpp"
#include "sqsieve/compensated.hpp"
#include "sqsieve/parallel.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace sqsieve {

// ---------------------------------------------------------------------------------------------
// Exact rationals for the counting side. Magnitudes stay far below 2^127 at desk scale; every
// product is overflow-checked anyway.

struct Rational
{
    i128 num = 0;
    i128 den = 1; // > 0

    Rational() = default;
    Rational(i64 n) : num(n), den(1) {}
    Rational(i128 n, i128 d) : num(n), den(d)
    {
        require(d != 0, "Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        reduce();
    }

    /// The exact binary value of a finite double.
    static Rational from_double(double x)
    {
        require(std::isfinite(x), "Rational: non-finite value");
        if (x == 0.0)
            return Rational(0);
        int e = 0;
        const double frac = std::frexp(x, &e); // x = frac 2^e, 0.5 <= |frac| < 1
        i64 mant = static_cast<i64>(std::ldexp(frac, 53));
        e -= 53;
        while (e < 0 && (mant & 1) == 0) {
            mant /= 2;
            ++e;
        }
        if (e >= 0) {
            if (e > 70)
                throw OversizeError("Rational: value too large for exact arithmetic");
            return Rational(static_cast<i128>(mant) << e, i128{1});
        }
        if (-e > 120)
            throw OversizeError("Rational: value too small for exact arithmetic");
        return Rational(static_cast<i128>(mant), i128{1} << (-e));
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& x, const Rational& y) { return x.num == y.num && x.den == y.den; }

private:
    void reduce()
    {
        i128 a = num < 0 ? -num : num, b = den;
        while (b != 0) {
            const i128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
    }
};

namespace detail {

inline i128 checked_mul(i128 a, i128 b)
{
    i128 out;
    if (__builtin_mul_overflow(a, b, &out))
        throw OversizeError("exact rational arithmetic overflowed 128 bits; shrink the instance");
    return out;
}

inline i128 checked_add(i128 a, i128 b)
{
    i128 out;
    if (__builtin_add_overflow(a, b, &out))
        throw OversizeError("exact rational arithmetic overflowed 128 bits; shrink the instance");
    return out;
}

inline i128 floor_div(i128 a, i128 b) // b > 0
{
    i128 q = a / b;
    if ((a % b != 0) && (a < 0))
        --q;
    return q;
}

inline i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

inline i128 gcd128(i128 a, i128 b)
{
    if (a < 0)
        a = -a;
    if (b < 0)
        b = -b;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace detail

inline Rational operator+(const Rational& x, const Rational& y)
{
    using namespace detail;
    const i128 g = gcd128(x.den, y.den);
    const i128 xs = y.den / g, ys = x.den / g;
    return {checked_add(checked_mul(x.num, xs), checked_mul(y.num, ys)), checked_mul(x.den, xs)};
}

inline Rational operator-(const Rational& x) { return {-x.num, x.den}; }
inline Rational operator-(const Rational& x, const Rational& y) { return x + (-y); }

inline Rational operator*(const Rational& x, const Rational& y)
{
    return {detail::checked_mul(x.num, y.num), detail::checked_mul(x.den, y.den)};
}

inline bool operator<(const Rational& x, const Rational& y)
{
    return detail::checked_mul(x.num, y.den) < detail::checked_mul(y.num, x.den);
}
inline bool operator<=(const Rational& x, const Rational& y) { return !(y < x); }

inline i128 floor(const Rational& x) { return detail::floor_div(x.num, x.den); }
inline i128 ceil(const Rational& x) { return detail::ceil_div(x.num, x.den); }

// ---------------------------------------------------------------------------------------------
// Coprime counting.

/// Squarefree divisors d of every q <= Q with mu(d), for inclusion-exclusion over (a, q) = 1.
class MobiusTable
{
public:
    struct Term
    {
        u64 d;
        int mu;
    };

    explicit MobiusTable(u64 Q) : terms_(Q + 1)
    {
        for (u64 q = 1; q <= Q; ++q) {
            std::vector<Term> t{{1, 1}};
            for (const auto& f : factorize(q).factors()) {
                const std::size_t n = t.size();
                for (std::size_t i = 0; i < n; ++i)
                    t.push_back({t[i].d * f.p, -t[i].mu});
            }
            terms_[q] = std::move(t);
        }
    }

    u64 size() const { return terms_.size() - 1; }

    /// #{a in [lo, hi] : gcd(a, q) = 1}.
    u64 coprime_in(u64 q, i128 lo, i128 hi) const
    {
        if (hi < lo)
            return 0;
        i128 total = 0;
        for (const auto& t : terms_.at(q)) {
            const i128 d = static_cast<i128>(t.d);
            total += t.mu * (detail::floor_div(hi, d) - detail::floor_div(lo - 1, d));
        }
        return static_cast<u64>(total);
    }

private:
    std::vector<std::vector<Term>> terms_;
};

// ---------------------------------------------------------------------------------------------
// P(alpha) = #{(q, a) : 1 <= q <= Q, (q, a) = 1, |a/q^2 - alpha| <= Delta}.

struct FareyStructure
{
    i64 b = 0;
    FactoredModulus r;
    double z = 0.0;
};

struct FareyQuery
{
    u64 Q = 1;
    double Delta = 0.0;
    double alpha = 0.0;
    std::optional<FareyStructure> structure;

    /// alpha = b/r + z with (b, r) = 1 and Delta <= z <= sqrt(Delta)/r.
    static FareyQuery structural(u64 Q, double Delta, i64 b, const FactoredModulus& r, double z)
    {
        const u64 rv = r.value();
        require(std::gcd(mod_reduce(b, rv), rv) == 1, "FareyQuery: need gcd(b, r) = 1");
        require(Delta <= z * (1.0 + 1e-12) && z <= std::sqrt(Delta) / static_cast<double>(rv) * (1.0 + 1e-12),
                "FareyQuery: need Delta <= z <= sqrt(Delta)/r");
        return {Q, Delta, static_cast<double>(b) / static_cast<double>(rv) + z, FareyStructure{b, r, z}};
    }
};

inline u64 farey_count_exact(u64 Q, const Rational& alpha, const Rational& Delta, const MobiusTable& mobius);

/// Counts with Delta and alpha (or b/r + z for a structural query) taken at their exact binary
/// values, so no boundary decision depends on rounding in a/q^2 - alpha.
inline u64 farey_count(const FareyQuery& query, const MobiusTable& mobius)
{
    require(query.Q >= 1 && query.Delta > 0.0, "farey_count: need Q >= 1 and Delta > 0");
    const Rational alpha = query.structure
                               ? Rational(query.structure->b, static_cast<i128>(query.structure->r.value())) +
                                     Rational::from_double(query.structure->z)
                               : Rational::from_double(query.alpha);
    return farey_count_exact(query.Q, alpha, Rational::from_double(query.Delta), mobius);
}

inline u64 farey_count(const FareyQuery& query) { return farey_count(query, MobiusTable(query.Q)); }

/// Exact count for rational alpha and Delta.
inline u64 farey_count_exact(u64 Q, const Rational& alpha, const Rational& Delta, const MobiusTable& mobius)
{
    require(Q >= 1 && Rational(0) < Delta, "farey_count_exact: need Q >= 1 and Delta > 0");
    require(mobius.size() >= Q, "farey_count_exact: Mobius table too small");
    const Rational left = alpha - Delta, right = alpha + Delta;
    u64 total = 0;
    for (u64 q = 1; q <= Q; ++q) {
        const Rational q2(static_cast<i64>(q * q));
        total += mobius.coprime_in(q, ceil(q2 * left), floor(q2 * right));
    }
    return total;
}

inline u64 farey_count_exact(u64 Q, const Rational& alpha, const Rational& Delta)
{
    return farey_count_exact(Q, alpha, Delta, MobiusTable(Q));
}

struct FareyMax
{
    u64 count = 0;   // max of P(b/r + z) over Delta <= z <= sqrt(Delta)/r
    Rational z;      // a maximizing z
    u64 at_lower = 0; // P at z = Delta
    u64 at_upper = 0; // P at z = sqrt(Delta)/r (floating-point count)
    std::size_t breakpoints = 0;
};

/// True iff z <= sqrt(1/N)/r, decided exactly by squaring.
inline bool below_sqrt_window(const Rational& z, u64 N, u64 r)
{
    if (z.num <= 0)
        return true;
    using detail::checked_mul;
    const i128 lhs = checked_mul(checked_mul(checked_mul(z.num, z.num), static_cast<i128>(r) * r), static_cast<i128>(N));
    return lhs <= checked_mul(z.den, z.den);
}

/// Exact maximum of z -> P(b/r + z) with Delta = 1/N over the window. P is a count of closed
/// z-intervals [x - b/r - Delta, x - b/r + Delta], one per fraction x = a/q^2, so its maximum is
/// attained at the window start or at a left end inside the window.
inline FareyMax farey_max_over_z(u64 Q, u64 N, i64 b, const FactoredModulus& r, const MobiusTable& mobius)
{
    const u64 rv = r.value();
    require(N >= 1 && rv >= 1, "farey_max_over_z: need N, r >= 1");
    require(std::gcd(mod_reduce(b, rv), rv) == 1, "farey_max_over_z: need gcd(b, r) = 1");
    require(static_cast<u128>(rv) * rv <= N, "farey_max_over_z: window is empty unless r <= sqrt(N)");
    const Rational Delta(1, static_cast<i128>(N));
    const Rational base(b, static_cast<i128>(rv));

    FareyMax out;
    out.z = Delta;
    out.at_lower = farey_count_exact(Q, base + Delta, Delta, mobius);
    out.count = out.at_lower;
    const double z_hi = std::sqrt(1.0 / static_cast<double>(N)) / static_cast<double>(rv);
    out.at_upper = farey_count(FareyQuery{Q, 1.0 / static_cast<double>(N), base.to_double() + z_hi, std::nullopt}, mobius);

    // left ends z = x - b/r - Delta in (Delta, z_hi]  <=>  x in (b/r + 2 Delta, b/r + Delta + z_hi]
    const Rational x_lo = base + Delta + Delta;
    const double x_hi = base.to_double() + 1.0 / static_cast<double>(N) + z_hi;
    for (u64 q = 1; q <= Q; ++q) {
        const Rational q2(static_cast<i64>(q * q));
        const i128 a_lo = floor(q2 * x_lo);
        const i128 a_hi = static_cast<i128>(std::ceil(x_hi * static_cast<double>(q * q))) + 1;
        for (i128 a = a_lo; a <= a_hi; ++a) {
            if (std::gcd(static_cast<u64>(a < 0 ? -a : a), q) != 1)
                continue;
            const Rational x(a, static_cast<i128>(q * q));
            if (x <= x_lo)
                continue;
            const Rational z = x - base - Delta;
            if (!below_sqrt_window(z, N, rv))
                continue;
            ++out.breakpoints;
            const u64 c = farey_count_exact(Q, base + z, Delta, mobius);
            if (c > out.count) {
                out.count = c;
                out.z = z;
            }
        }
    }
    return out;
}

inline FareyMax farey_max_over_z(u64 Q, u64 N, i64 b, const FactoredModulus& r)
{
    return farey_max_over_z(Q, N, b, r, MobiusTable(Q));
}

// ---------------------------------------------------------------------------------------------
// Quadratic forms.

struct LsInstance
{
    u64 Q = 1;
    u64 N = 1;
    i64 M_offset = 0;
    std::vector<Complex> coeffs; // a_n for M < n <= M + N, coeffs[n - M - 1]

    double Z() const
    {
        CompensatedSum s;
        for (const auto& c : coeffs)
            s += std::norm(c);
        return s.value();
    }
};

namespace detail {

inline void validate_ls(const LsInstance& inst)
{
    require(inst.Q >= 1 && inst.N >= 1, "LsInstance: need Q, N >= 1");
    require(inst.coeffs.size() == inst.N, "LsInstance: need exactly N coefficients");
}

// sum over reduced a mod `modulus` of |sum_n a_n e(n a / modulus)|^2, for modulus = base^k.
inline double reduced_fraction_energy(const LsInstance& inst, u64 base, u64 modulus)
{
    const PhaseTable table(modulus);
    const u64 n0 = mod_reduce(inst.M_offset + 1, modulus);
    CompensatedSum total;
    for (u64 a = 1; a <= modulus; ++a) {
        if (std::gcd(a, base) != 1)
            continue;
        ComplexAccumulator inner;
        u64 phase = mul_mod(n0, a % modulus, modulus);
        const u64 step = a % modulus;
        for (const auto& c : inst.coeffs) {
            inner += c * table.at_reduced(phase);
            phase = add_mod(phase, step, modulus);
        }
        total += std::norm(inner.value());
    }
    return total.value();
}

} // namespace detail

/// sum_{q <= Q} sum_{a <= q^2, (a, q) = 1} |sum_n a_n e(n a / q^2)|^2.
inline double ls_quadform_square_moduli(const LsInstance& inst, unsigned threads = 1)
{
    detail::validate_ls(inst);
    double work = 0.0;
    for (u64 q = 1; q <= inst.Q; ++q)
        work += static_cast<double>(q) * static_cast<double>(q);
    guard_operations(work * static_cast<double>(inst.N), "ls_quadform_square_moduli");
    const auto per_q = parallel_map<double>(inst.Q, threads, [&](std::size_t i) {
        const u64 q = i + 1;
        return detail::reduced_fraction_energy(inst, q, q * q);
    });
    CompensatedSum s;
    for (double x : per_q)
        s += x;
    return s.value();
}

/// The same form over all moduli q <= Q2 (not squares): sum_{q <= Q2} sum_{(a, q) = 1}.
inline double ls_quadform_generic(const LsInstance& inst, u64 Q2, unsigned threads = 1)
{
    detail::validate_ls(inst);
    require(Q2 >= 1, "ls_quadform_generic: need Q2 >= 1");
    guard_operations(static_cast<double>(Q2) * static_cast<double>(Q2) / 2.0 * static_cast<double>(inst.N),
                     "ls_quadform_generic");
    const auto per_q = parallel_map<double>(Q2, threads, [&](std::size_t i) {
        const u64 q = i + 1;
        return detail::reduced_fraction_energy(inst, q, q);
    });
    CompensatedSum s;
    for (double x : per_q)
        s += x;
    return s.value();
}

/// (N + Q^2 - 1) Z: the classical large sieve over moduli q <= Q.
inline double classical_sieve_bound(u64 N, u64 Q, double Z)
{
    return (static_cast<double>(N) + static_cast<double>(Q) * static_cast<double>(Q) - 1.0) * Z;
}

struct LsBounds
{
    double original = 0.0;   // Q^3 + Q^2 N^(1/2) + Q^(1/2) N
    double best_known = 0.0; // Q^3 + N + min{Q^2 N^(1/2), Q^(1/2) N}
    double conjecture = 0.0; // Q^3 + N
};

inline LsBounds ls_bound_eval(double Q, double N)
{
    require(Q >= 1.0 && N >= 1.0, "ls_bound_eval: need Q, N >= 1");
    const double a = Q * Q * std::sqrt(N), b = std::sqrt(Q) * N, q3 = Q * Q * Q;
    return {q3 + a + b, q3 + N + std::min(a, b), q3 + N};
}

struct LsRelation
{
    double lhs = 0.0;
    double Z = 0.0;
    u64 rhs_max_P = 0;
    u64 arg_r = 1;
    i64 arg_b = 0;
    Rational arg_z;
};

/// The quadratic form against Z times the largest P(b/r + z) over r <= sqrt(N), (b, r) = 1,
/// Delta = 1/N <= z <= sqrt(Delta)/r.
inline LsRelation ls_relation_check(const LsInstance& inst, unsigned threads = 1)
{
    detail::validate_ls(inst);
    LsRelation out;
    out.lhs = ls_quadform_square_moduli(inst, threads);
    out.Z = inst.Z();
    const u64 r_max = static_cast<u64>(std::floor(std::sqrt(static_cast<double>(inst.N)) + 1e-9));
    guard_operations(static_cast<double>(r_max) * r_max * inst.Q * inst.Q * inst.Q, "ls_relation_check");
    const MobiusTable mobius(inst.Q);
    for (u64 r = 1; r <= r_max; ++r) {
        if (r * r > inst.N)
            break;
        const auto fr = factorize(r);
        for (u64 b = (r == 1 ? 0 : 1); b < std::max<u64>(r, 1); ++b) {
            if (std::gcd(b, r) != 1)
                continue;
            const auto m = farey_max_over_z(inst.Q, inst.N, static_cast<i64>(b), fr, mobius);
            if (m.count > out.rhs_max_P) {
                out.rhs_max_P = m.count;
                out.arg_r = r;
                out.arg_b = static_cast<i64>(b);
                out.arg_z = m.z;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Parameter choices at N = Q^3 with z = 1/(Q^(3/2+gamma) r).

struct PipelineConstants
{
    double eps = 0.05;
    double C0 = 0.5;
    double C1 = 2.0;
    double C2 = 1.0;
};

struct LsParams
{
    double Q = 0.0, r = 0.0, gamma = 0.0;
    PipelineConstants constants;
    double z = 0.0;
    double delta = 0.0;
    double L = 0.0, M0 = 0.0, M = 0.0, F = 0.0, H = 0.0;
    bool lmh_ok = false;    // 1 <= L, M <= r and 1 <= H <= min{1/(LF), M}
    bool delta_ok = false;  // Q^(1/2+gamma) r <= delta <= Q^2
    bool rcond2_ok = false; // r <= Q^(3/2 - gamma - 2 eps)
    bool rcond3_ok = false; // Q^(1/2+gamma+eps) <= r <= Q^(1-2eps) and gamma <= 1/2
    bool valid() const { return lmh_ok && delta_ok && rcond2_ok && rcond3_ok; }
    /// Outside the window the count is handled by lemma41_bound instead.
    bool use_lemma41_fallback() const { return !rcond3_ok; }
};

/// Balanced choice delta = Q^(5/4+gamma/2+eps) r^(1/2), so L = r^(1/2) / Q^(1/4+gamma/2); an explicit
/// delta overrides it.
inline LsParams params_pipeline(double Q, const FactoredModulus& r, double gamma, PipelineConstants k = {},
                                std::optional<double> delta = std::nullopt)
{
    require(Q >= 2.0, "params_pipeline: need Q >= 2");
    require(r.is_odd(), "params_pipeline: r must be odd");
    require(gamma >= 0.0, "params_pipeline: need gamma >= 0");
    LsParams p;
    p.Q = Q;
    p.r = static_cast<double>(r.value());
    p.gamma = gamma;
    p.constants = k;
    const double e = k.eps;
    p.z = 1.0 / (std::pow(Q, 1.5 + gamma) * p.r);
    p.delta = delta ? *delta : std::pow(Q, 1.25 + gamma / 2 + e) * std::sqrt(p.r);
    p.L = std::pow(Q, 1.0 + e) * p.r / p.delta;
    p.M0 = k.C0 * std::pow(Q, 0.5 - gamma);
    p.M = k.C1 * std::pow(Q, 0.5 - gamma);
    p.F = k.C2 * std::pow(Q, 0.5 + gamma) / p.r;
    p.H = 1.0 / (p.L * p.F);
    const double tol = 1e-12;
    auto le = [tol](double x, double y) { return x <= y * (1.0 + tol); };
    p.lmh_ok = le(1.0, p.L) && le(p.L, p.r) && le(1.0, p.M) && le(p.M, p.r) && le(1.0, p.H) &&
               le(p.H, std::min(1.0 / (p.L * p.F), p.M));
    p.delta_ok = le(std::pow(Q, 0.5 + gamma) * p.r, p.delta) && le(p.delta, Q * Q);
    p.rcond2_ok = le(p.r, std::pow(Q, 1.5 - gamma - 2 * e));
    p.rcond3_ok = le(std::pow(Q, 0.5 + gamma + e), p.r) && le(p.r, std::pow(Q, 1.0 - 2 * e)) && gamma <= 0.5;
    return p;
}

/// Q^(5/8) r^(-1/4) + Q^(1/2) s0^(-1/4) + Q^(1/4) r^(1/4) s1^(1/8).
inline double thm3_bound(double Q, const FactoredModulus& r)
{
    require(r.is_odd(), "thm3_bound: r must be odd");
    const double rv = static_cast<double>(r.value());
    const double s0 = static_cast<double>(r.squarefree_part()), s1 = static_cast<double>(r.squarefull_part());
    return std::pow(Q, 0.625) * std::pow(rv, -0.25) + std::sqrt(Q) * std::pow(s0, -0.25) +
           std::pow(Q, 0.25) * std::pow(rv, 0.25) * std::pow(s1, 0.125);
}

/// 1 + Q^2 r z + Q^3 Delta (the N^(eps/3) factor dropped).
inline double lemma41_bound(double Q, double N, double r, double z, double Delta)
{
    require(Q > 0 && N > 0 && r > 0 && z > 0 && Delta > 0, "lemma41_bound: inputs must be positive");
    return 1.0 + Q * Q * r * z + Q * Q * Q * Delta;
}

} // namespace sqsieve
