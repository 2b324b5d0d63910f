#pragma once

// Direct evaluation of a whole row b -> G(a, b, c) at once. For fixed (a, c) the defining sum
// is the length-c DFT of n -> e(a n^2 / c), so one FFT replaces c separate O(c) sums. Links
// against FFTW3.

#include "sqsieve/gauss.hpp"

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

namespace sqsieve {

namespace detail {
// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace detail

class GaussRowEvaluator
{
public:
    explicit GaussRowEvaluator(u64 c) : c_(c), phases_(c)
    {
        require(c >= 1 && c <= kMaxDirectGaussModulus, "GaussRowEvaluator: modulus out of range");
        in_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * c));
        out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * c));
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            plan_ = fftw_plan_dft_1d(static_cast<int>(c), in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        for (u64 k = 0; k < c; ++k)
            phases_[k] = unit_phase(k, c);
    }

    GaussRowEvaluator(const GaussRowEvaluator&) = delete;
    GaussRowEvaluator& operator=(const GaussRowEvaluator&) = delete;

    ~GaussRowEvaluator()
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }

    u64 modulus() const { return c_; }

    /// G(a, b, c) for b = 0 .. c-1.
    std::vector<Complex> row(i64 a_signed)
    {
        const u64 a = mod_reduce(a_signed, c_);
        u64 phase = 0;
        u64 step = a;
        const u64 two_a = add_mod(a, a, c_);
        for (u64 n = 0; n < c_; ++n) {
            in_[n][0] = phases_[phase].real();
            in_[n][1] = phases_[phase].imag();
            phase = add_mod(phase, step, c_);
            step = add_mod(step, two_a, c_);
        }
        fftw_execute(plan_);
        std::vector<Complex> result(c_);
        for (u64 b = 0; b < c_; ++b)
            result[b] = {out_[b][0], out_[b][1]};
        return result;
    }

private:
    u64 c_;
    std::vector<Complex> phases_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

} // namespace sqsieve
