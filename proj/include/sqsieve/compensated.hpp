#pragma once

#include "sqsieve/arith.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#ifdef __FAST_MATH__
#error "compensated summation requires IEEE semantics; do not build with -ffast-math"
#endif

namespace sqsieve {

using Complex = std::complex<double>;

/// Neumaier's variant of Kahan summation: also correct when a term exceeds the running sum.
struct CompensatedSum
{
    double sum = 0.0;
    double compensation = 0.0;

    void add(double value)
    {
        const double t = sum + value;
        if (std::abs(sum) >= std::abs(value))
            compensation += (sum - t) + value;
        else
            compensation += (value - t) + sum;
        sum = t;
    }

    CompensatedSum& operator+=(double value)
    {
        add(value);
        return *this;
    }

    void merge(const CompensatedSum& other)
    {
        add(other.sum);
        add(other.compensation);
    }

    double value() const { return sum + compensation; }
};

struct ComplexAccumulator
{
    CompensatedSum re;
    CompensatedSum im;

    ComplexAccumulator& operator+=(Complex z)
    {
        re.add(z.real());
        im.add(z.imag());
        return *this;
    }

    void merge(const ComplexAccumulator& other)
    {
        re.merge(other.re);
        im.merge(other.im);
    }

    Complex value() const { return {re.value(), im.value()}; }
};

/// e(k / n) = exp(2 pi i k / n) for an integer phase, reduced to the symmetric range before the
/// transcendental call so the phase error does not grow with k.
inline Complex unit_phase(u64 k, u64 n)
{
    k %= n;
    const double centred = (2 * k > n) ? -static_cast<double>(n - k) : static_cast<double>(k);
    const double angle = 2.0 * std::numbers::pi * (centred / static_cast<double>(n));
    return {std::cos(angle), std::sin(angle)};
}

inline Complex unit_phase_signed(i64 k, u64 n) { return unit_phase(mod_reduce(k, n), n); }

/// e(x) for real x, reducing x modulo 1 first.
inline Complex unit_phase_real(double x)
{
    const double frac = x - std::nearbyint(x);
    const double angle = 2.0 * std::numbers::pi * frac;
    return {std::cos(angle), std::sin(angle)};
}

/// Precomputed e(k / n) for k in [0, n).
class PhaseTable
{
public:
    explicit PhaseTable(u64 n) : n_(n), table_(n)
    {
        for (u64 k = 0; k < n; ++k)
            table_[k] = unit_phase(k, n);
    }

    u64 modulus() const { return n_; }
    Complex operator[](u64 k) const { return table_[k % n_]; }
    Complex at_reduced(u64 k) const { return table_[k]; }

private:
    u64 n_;
    std::vector<Complex> table_;
};

} // namespace sqsieve
