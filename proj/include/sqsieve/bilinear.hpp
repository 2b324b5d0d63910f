#pragma once

// Bilinear sums over all modular square roots
//
//   Sigma = sum_{|l| <= L} sum_{m <= M} alpha_l beta_m sum_{k^2 = j m mod r} e_r(l k) e(l f(m)),
//
// the shift-energy counts A(d) behind their estimate, and the bound formulas they are compared to.

#include "sqsieve/arith.hpp"
#include "sqsieve/compensated.hpp"
#include "sqsieve/parallel.hpp"
#include "sqsieve/rng.hpp"
#include "sqsieve/sqrtmod.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace sqsieve {

struct PhaseSpec
{
    enum class Kind
    {
        Zero,
        ScaledSqrt, // f(x) = -A sqrt(x)
        Tabulated,  // f(m) = values[m - 1]
    };

    Kind kind = Kind::Zero;
    double amplitude = 0.0;
    std::vector<double> values;

    static PhaseSpec zero() { return {}; }
    static PhaseSpec scaled_sqrt(double A) { return {Kind::ScaledSqrt, A, {}}; }
    static PhaseSpec tabulated(std::vector<double> v) { return {Kind::Tabulated, 0.0, std::move(v)}; }

    double operator()(u64 m) const
    {
        switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::ScaledSqrt:
            return -amplitude * std::sqrt(static_cast<double>(m));
        case Kind::Tabulated:
            return values.at(m - 1);
        }
        return 0.0;
    }

    /// sup |f'| on [1, M]. For a table, the largest step between consecutive values (any
    /// differentiable interpolant has |f'| at least this somewhere).
    double derivative_sup(u64 M) const
    {
        switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::ScaledSqrt:
            return std::abs(amplitude) / 2.0; // |f'(x)| = A / (2 sqrt x), largest at x = 1
        case Kind::Tabulated: {
            double sup = 0.0;
            for (u64 m = 1; m < M; ++m)
                sup = std::max(sup, std::abs(values.at(m) - values.at(m - 1)));
            return sup;
        }
        }
        return 0.0;
    }
};

struct BilinearInstance
{
    FactoredModulus r;
    i64 j = 1;
    u64 L = 1;
    u64 M = 1;
    std::vector<Complex> alpha; // alpha[l + L] for -L <= l <= L
    std::vector<Complex> beta;  // beta[m - 1] for 1 <= m <= M
    PhaseSpec f;
    double F = 0.0;
    u64 H = 1;

    Complex alpha_at(i64 l) const { return alpha[static_cast<std::size_t>(l + static_cast<i64>(L))]; }
};

/// min{1/(L F), M}, with 1/(L F) = infinity for F = 0.
inline double h_ceiling(u64 L, double F, u64 M)
{
    const double inv = (F > 0.0) ? 1.0 / (static_cast<double>(L) * F) : std::numeric_limits<double>::infinity();
    return std::min(inv, static_cast<double>(M));
}

inline void require_h_range(u64 L, double F, u64 M, u64 H)
{
    require(H >= 1 && static_cast<double>(H) <= h_ceiling(L, F, M) * (1.0 + 1e-12),
            "H must satisfy 1 <= H <= min{1/(LF), M}");
}

inline void validate(const BilinearInstance& b)
{
    const u64 r = b.r.value();
    require(r >= 1, "BilinearInstance: modulus must be positive");
    require(std::gcd(mod_reduce(b.j, r), r) == 1, "BilinearInstance: gcd(r, j) must be 1");
    require(b.L >= 1 && b.L <= r && b.M >= 1 && b.M <= r, "BilinearInstance: need 1 <= L, M <= r");
    require(b.alpha.size() == 2 * b.L + 1, "BilinearInstance: alpha must have 2L + 1 entries");
    require(b.beta.size() == b.M, "BilinearInstance: beta must have M entries");
    if (b.f.kind == PhaseSpec::Kind::Tabulated)
        require(b.f.values.size() >= b.M, "BilinearInstance: tabulated phase needs M values");
    require(b.F >= 0.0 && b.F <= 1.0 / static_cast<double>(b.L) * (1.0 + 1e-12), "BilinearInstance: need 0 <= F <= 1/L");
    require(b.F >= b.f.derivative_sup(b.M) * (1.0 - 1e-12), "BilinearInstance: F is below sup |f'| on [1, M]");
    require_h_range(b.L, b.F, b.M, b.H);
}

inline double norm2(const std::vector<Complex>& x)
{
    CompensatedSum s;
    for (const auto& z : x)
        s += std::norm(z);
    return std::sqrt(s.value());
}

inline double norm_inf(const std::vector<Complex>& x)
{
    double best = 0.0;
    for (const auto& z : x)
        best = std::max(best, std::abs(z));
    return best;
}

/// Square roots of j m mod r for m = 1 .. M.
inline std::vector<std::vector<u64>> root_table(const FactoredModulus& r, i64 j, u64 M)
{
    std::vector<std::vector<u64>> roots(M + 1);
    const u64 rv = r.value();
    for (u64 m = 1; m <= M; ++m)
        roots[m] = sqrt_mod(static_cast<i64>(mul_mod(mod_reduce(j, rv), m % rv, rv)), r).roots;
    return roots;
}

inline Complex sigma_eval(const BilinearInstance& b, unsigned threads = 1)
{
    validate(b);
    const u64 r = b.r.value();
    const auto roots = root_table(b.r, b.j, b.M);
    double work = 0.0;
    for (u64 m = 1; m <= b.M; ++m)
        work += static_cast<double>(roots[m].size());
    guard_operations(work * static_cast<double>(2 * b.L + 1), "sigma_eval");
    const PhaseTable table(r);
    std::vector<double> fm(b.M + 1, 0.0);
    for (u64 m = 1; m <= b.M; ++m)
        fm[m] = b.f(m);

    const std::size_t width = 2 * b.L + 1;
    // slot i holds alpha_l times the full m-sum for l = i - L
    const auto per_l = parallel_map<ComplexAccumulator>(width, threads, [&](std::size_t i) {
        ComplexAccumulator acc;
        const i64 l = static_cast<i64>(i) - static_cast<i64>(b.L);
        const Complex al = b.alpha[i];
        if (al == Complex{})
            return acc;
        const u64 lr = mod_reduce(l, r);
        for (u64 m = 1; m <= b.M; ++m) {
            if (roots[m].empty())
                continue;
            Complex inner{};
            for (u64 k : roots[m])
                inner += table.at_reduced(mul_mod(lr, k, r));
            Complex term = al * b.beta[m - 1] * inner;
            if (b.f.kind != PhaseSpec::Kind::Zero)
                term *= unit_phase_real(static_cast<double>(l) * fm[m]);
            acc += term;
        }
        return acc;
    });
    ComplexAccumulator total;
    for (const auto& a : per_l)
        total.merge(a);
    return total.value();
}

// ---------------------------------------------------------------------------------------------

struct EnergyCount
{
    i64 d = 0;
    u64 count = 0;
};

namespace detail {

inline void require_energy_pre(const FactoredModulus& r, i64 j, u64 M, u64 H)
{
    require(r.is_odd(), "energy_count: modulus must be odd");
    require(std::gcd(mod_reduce(j, r.value()), r.value()) == 1, "energy_count: gcd(j, r) must be 1");
    require(H >= 1 && H <= M && 2 * M <= r.value(), "energy_count: need 1 <= H <= M <= r/2");
}

} // namespace detail

/// A(d) for every d in the symmetric range -(r-1)/2 .. (r-1)/2, ascending.
inline std::vector<EnergyCount> energy_profile(const FactoredModulus& r, i64 j, u64 M, u64 H)
{
    detail::require_energy_pre(r, j, M, H);
    const u64 rv = r.value();
    const auto roots = root_table(r, j, M);
    double work = 0.0;
    for (u64 m = 1; m <= M; ++m)
        work += static_cast<double>(roots[m].size());
    guard_operations(work * work / static_cast<double>(M) * static_cast<double>(2 * H + 1), "energy_profile");
    std::vector<u64> by_residue(rv, 0);
    for (u64 m1 = 1; m1 <= M; ++m1) {
        const u64 lo = m1 > H ? m1 - H : 1;
        const u64 hi = std::min(M, m1 + H);
        for (u64 m2 = lo; m2 <= hi; ++m2)
            for (u64 k1 : roots[m1])
                for (u64 k2 : roots[m2])
                    ++by_residue[sub_mod(k1, k2, rv)];
    }
    std::vector<EnergyCount> out;
    out.reserve(rv);
    const i64 half = static_cast<i64>(rv / 2);
    for (i64 d = -half; d <= half; ++d)
        out.push_back({d, by_residue[mod_reduce(d, rv)]});
    return out;
}

inline EnergyCount energy_count(const FactoredModulus& r, i64 j, u64 M, u64 H, i64 d)
{
    const auto profile = energy_profile(r, j, M, H);
    const u64 rv = r.value();
    const u64 target = mod_reduce(d, rv);
    for (const auto& e : profile)
        if (mod_reduce(e.d, rv) == target)
            return {d, e.count};
    return {d, 0};
}

/// sum over |m1 - m2| <= H of |roots(j m1)| |roots(j m2)|: the total of A(d) over all d.
inline u64 energy_pair_total(const FactoredModulus& r, i64 j, u64 M, u64 H)
{
    detail::require_energy_pre(r, j, M, H);
    const auto roots = root_table(r, j, M);
    u64 total = 0;
    for (u64 m1 = 1; m1 <= M; ++m1)
        for (u64 m2 = (m1 > H ? m1 - H : 1); m2 <= std::min(M, m1 + H); ++m2)
            total += roots[m1].size() * roots[m2].size();
    return total;
}

// ---------------------------------------------------------------------------------------------
// Bound formulas; r^eps and implied constants are not included.

inline double bound_thm1(const BilinearInstance& b, u64 H)
{
    require_h_range(b.L, b.F, b.M, H);
    const double h = static_cast<double>(H), L = static_cast<double>(b.L), M = static_cast<double>(b.M);
    const double r = static_cast<double>(b.r.value());
    const double bracket = std::pow(h, -0.5) * std::sqrt(L) * M + std::pow(h, 0.25) * std::pow(L, 0.25) * M +
                           std::pow(h, -0.25) * std::pow(L, 0.25) * std::pow(M, 0.75) * std::pow(r, 0.25);
    return bracket * norm2(b.alpha) * norm_inf(b.beta);
}

struct Thm2Bound
{
    double first = 0.0;
    double second = 0.0;
    double min = 0.0;
};

inline Thm2Bound bound_thm2(const BilinearInstance& b, u64 H)
{
    require(b.r.is_odd(), "bound_thm2: modulus must be odd");
    require(2 * b.M <= b.r.value(), "bound_thm2: need M <= r/2");
    require(H >= 1 && H <= b.M, "bound_thm2: need 1 <= H <= M");
    const double h = static_cast<double>(H), L = static_cast<double>(b.L), M = static_cast<double>(b.M);
    const double r = static_cast<double>(b.r.value());
    const double s0 = static_cast<double>(b.r.squarefree_part());
    const double s1 = static_cast<double>(b.r.squarefull_part());
    const double norms = norm2(b.alpha) * norm_inf(b.beta);
    Thm2Bound out;
    out.first = (std::sqrt(L * M * r / h) + std::sqrt(M) * std::pow(r, 0.25) + M) * norms;
    out.second = (std::sqrt(L / h) * M + std::sqrt(M * r / h) * std::pow(s0, -0.25) +
                  std::sqrt(L * M) * std::pow(r, 0.25) * std::pow(s1, 0.125) + M) *
                 norms;
    out.min = std::min(out.first, out.second);
    return out;
}

/// The second branch as displayed for squarefree r:
/// H^{-1/2} L^{1/2} M + H^{-1/2} M^{1/2} r^{1/4} + L^{1/2} M^{1/2} r^{1/4} + M.
inline double bound_thm2_squarefree_second(const BilinearInstance& b, u64 H)
{
    require(b.r.is_squarefree(), "bound_thm2_squarefree_second: modulus must be squarefree");
    const double h = static_cast<double>(H), L = static_cast<double>(b.L), M = static_cast<double>(b.M);
    const double r = static_cast<double>(b.r.value());
    return (std::sqrt(L / h) * M + std::sqrt(M / h) * std::pow(r, 0.25) + std::sqrt(L * M) * std::pow(r, 0.25) + M) *
           norm2(b.alpha) * norm_inf(b.beta);
}

inline double bound_trivial(const BilinearInstance& b)
{
    return std::sqrt(static_cast<double>(b.L)) * static_cast<double>(b.M) * norm2(b.alpha) * norm_inf(b.beta);
}

// ---------------------------------------------------------------------------------------------
// Coefficient sequences.

inline std::vector<Complex> ones(std::size_t n) { return std::vector<Complex>(n, Complex{1.0, 0.0}); }

inline std::vector<Complex> random_unit_phases(std::size_t n, SplitMix64& rng)
{
    std::vector<Complex> out(n);
    for (auto& z : out)
        z = rng.unit_complex();
    return out;
}

/// One "re im" pair per line; blank lines and lines starting with '#' are skipped.
inline std::vector<Complex> read_coefficients(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open coefficient file '" + path + "'");
    std::vector<Complex> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream is(line);
        double re = 0.0, im = 0.0;
        std::string extra;
        if (!(is >> re >> im) || (is >> extra))
            throw InputError(path + ":" + std::to_string(lineno) + ": expected 're im'");
        out.emplace_back(re, im);
    }
    if (in.bad())
        throw IoError("error reading coefficient file '" + path + "'");
    return out;
}

inline void write_coefficients(const std::string& path, const std::vector<Complex>& values)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write coefficient file '" + path + "'");
    out.precision(17);
    for (const auto& z : values)
        out << z.real() << ' ' << z.imag() << '\n';
    if (!out)
        throw IoError("error writing coefficient file '" + path + "'");
}

} // namespace sqsieve
