// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
//
//   acceptance            run all criteria
//   acceptance 4 7        run a subset

#include "oracles.hpp"

#include "experiments.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace sqsieve;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

unsigned threads() { return default_thread_count(); }

// ---------------------------------------------------------------------------------------------
// 1. Closed form against the defining sum on every cell, via one DFT per row.

Outcome gauss_all_cells()
{
    std::vector<u64> cs;
    for (u64 c = 1; c <= 999; c += 2)
        cs.push_back(c);
    const auto worst = parallel_map<double>(cs.size(), threads(), [&](std::size_t i) {
        const u64 c = cs[i];
        GaussRowEvaluator ev(c);
        double w = 0.0;
        for (u64 a = 0; a < c; ++a) {
            const auto row = ev.row(static_cast<i64>(a));
            for (u64 b = 0; b < c; ++b) {
                const double dev = std::abs(row[b] - gauss_closed_form({static_cast<i64>(a), static_cast<i64>(b), c}));
                w = std::max(w, dev / std::sqrt(static_cast<double>(c)));
            }
        }
        // spot-check the row route against term-by-term sums
        for (u64 a : {u64{1}, c / 3, c - 1})
            for (u64 b : {u64{0}, c / 2}) {
                const GaussSumParams g{static_cast<i64>(a), static_cast<i64>(b), c};
                w = std::max(w, std::abs(gauss_direct(g) - gauss_closed_form(g)) / std::sqrt(static_cast<double>(c)));
            }
        return w;
    });
    const double w = *std::max_element(worst.begin(), worst.end());
    return {w <= 1e-6, "500 moduli, all (a, b); max |closed - direct|/sqrt(c) = " + fmt("%.3g", w)};
}

// 2. Square roots against exhaustive tables.

Outcome sqrt_complete()
{
    std::vector<u64> rs;
    for (u64 r = 1; r <= 2000; r += 2)
        rs.push_back(r);
    const auto bad = parallel_map<u64>(rs.size(), threads(), [&](std::size_t i) {
        const u64 r = rs[i];
        std::vector<std::vector<u64>> table(r);
        for (u64 k = 0; k < r; ++k)
            table[k * k % r].push_back(k);
        const auto f = factorize(r);
        u64 mismatches = 0, total = 0;
        for (u64 s = 0; s < r; ++s) {
            const auto got = sqrt_mod(static_cast<i64>(s), f);
            total += got.size();
            mismatches += got.roots != table[s];
        }
        return mismatches + (total != r);
    });
    u64 failures = 0;
    for (u64 b : bad)
        failures += b;
    return {failures == 0, "1000 moduli, every s; failures = " + std::to_string(failures)};
}

// 3. Multiplicativity over every coprime splitting.

Outcome esum_multiplicative()
{
    const std::size_t n = 10000;
    const auto seeds = cli::detail::derive_seeds(0xE5u, n);
    struct Row
    {
        double worst; // deviation / sqrt(r2)
        u64 splits;
    };
    const auto rows = parallel_map<Row>(n, threads(), [&](std::size_t i) {
        SplitMix64 rng(seeds[i]);
        const u64 r = cli::detail::draw_log_uniform_odd(rng, 3, 100000);
        const auto f = factorize(r);
        const auto s = random_structured_params(rng, f);
        const Complex lhs = esum_eval(s);
        const auto& pf = f.factors();
        Row row{0.0, 0};
        // each subset of the prime powers gives one coprime splitting q1 q2 = r
        for (u64 mask = 0; mask < (u64{1} << pf.size()); ++mask) {
            u64 q1 = 1;
            for (std::size_t k = 0; k < pf.size(); ++k)
                if (mask >> k & 1)
                    q1 *= pf[k].value();
            const u64 q2 = r / q1;
            const Complex rhs = esum_eval(restrict_params(s, q1, q2)) * esum_eval(restrict_params(s, q2, q1));
            row.worst = std::max(row.worst, std::abs(lhs - rhs) / std::sqrt(static_cast<double>(r)));
            ++row.splits;
        }
        return row;
    });
    double worst = 0.0;
    u64 splits = 0;
    for (const auto& r : rows) {
        worst = std::max(worst, r.worst);
        splits += r.splits;
    }
    return {worst <= 1e-6, "10^4 tuples, " + std::to_string(splits) + " splittings; max deviation/sqrt(r2) = " +
                               fmt("%.3g", worst)};
}

// 4. Stationary phase at prime powers.

Outcome cochrane()
{
    const std::vector<std::pair<u64, unsigned>> cases{{3, 3}, {3, 4}, {3, 7}, {5, 3}, {5, 5}, {7, 3}, {7, 4}};
    const std::size_t wanted = 500;
    struct Row
    {
        u64 pm, tuples, attempts, alphas, critical, violations;
        double worst_off, worst_on;
    };
    const auto rows = parallel_map<Row>(cases.size(), threads(), [&](std::size_t ci) {
        const auto [p, m] = cases[ci];
        const u64 pm = ipow(p, m);
        const auto fpm = factorize(pm);
        SplitMix64 rng(0xC0C0 + pm);
        Row row{pm, 0, 0, 0, 0, 0, 0.0, 0.0};
        const double tol = 1e-6 * std::pow(static_cast<double>(p), m / 2.0);
        while (row.tuples < wanted && row.attempts < 200 * wanted) {
            ++row.attempts;
            auto s = random_structured_params(rng, fpm);
            // lift a and v to a random level t' in [0, m - 2]
            const unsigned level = static_cast<unsigned>(rng.below(m - 1));
            const u64 pl = ipow(p, level);
            s.a = static_cast<i64>(pl * rng.below(pm / pl));
            s.v = static_cast<i64>(pl * rng.below(pm / pl));
            const i64 q = static_cast<i64>(cli::detail::draw_unit(rng, pm));
            const auto ctx = critical_points(p, m, s, q);
            if (ctx.regime != CochraneRegime::Stationary || ctx.t + 2 > m)
                continue;
            ++row.tuples;
            const auto parts = partial_sums(p, m, s, q);
            for (u64 alpha = 0; alpha < p; ++alpha) {
                ++row.alphas;
                const double mag = std::abs(parts[alpha]);
                unsigned nu = 0;
                for (const auto& cp : ctx.critical_points)
                    if (cp.alpha == alpha)
                        nu = cp.multiplicity;
                if (nu == 0) {
                    row.worst_off = std::max(row.worst_off, mag / tol);
                    row.violations += mag > tol;
                } else {
                    ++row.critical;
                    const double bound = ctx.alpha_bound(nu);
                    row.worst_on = std::max(row.worst_on, mag / bound);
                    row.violations += mag > bound + tol;
                }
            }
        }
        return row;
    });
    bool ok = true;
    std::ostringstream os;
    u64 alphas = 0, critical = 0, violations = 0;
    double off = 0.0, on = 0.0;
    for (const auto& r : rows) {
        if (r.tuples < wanted) {
            ok = false;
            os << "only " << r.tuples << " tuples with t <= m-2 for " << r.pm << "; ";
        }
        alphas += r.alphas;
        critical += r.critical;
        violations += r.violations;
        off = std::max(off, r.worst_off);
        on = std::max(on, r.worst_on);
    }
    ok = ok && violations == 0;
    os << "7 prime powers x " << wanted << " tuples, " << alphas << " alphas (" << critical
       << " critical); violations = " << violations << ", max off-critical |S|/(1e-6 p^(m/2)) = " << fmt("%.3g", off)
       << ", max critical |S|/bound = " << fmt("%.4f", on);
    return {ok, os.str()};
}

// 5. Prime moduli: full (a, v) grid for several structural tuples per p.

Outcome perelmuter()
{
    std::vector<u64> primes;
    for (u64 p = 3; p <= 200; p += 2)
        if (is_prime(p))
            primes.push_back(p);
    struct Row
    {
        u64 evaluations, violations, violations_four;
        double worst, worst_v0;
    };
    const auto rows = parallel_map<Row>(primes.size(), threads(), [&](std::size_t i) {
        const u64 p = primes[i];
        const auto fp = factorize(p);
        SplitMix64 rng(0x9E + p);
        std::vector<std::pair<ExpSumParams, i64>> tuples;
        {
            auto s = random_structured_params(rng, fp); // generic
            tuples.push_back({s, 1});
        }
        {
            auto s = random_structured_params(rng, fp); // p | g4
            s.g4 = static_cast<i64>(p) * rng.between(1, 7);
            tuples.push_back({s, static_cast<i64>(cli::detail::draw_unit(rng, p))});
        }
        {
            auto s = random_structured_params(rng, fp); // p | f4: F is linear mod p
            const i64 k = rng.between(1, 9);
            s.f4 = static_cast<i64>(p);
            s.f6 = 1;
            s.f5 = k;
            s.f7 = 1 - s.f4 * k;
            tuples.push_back({s, static_cast<i64>(cli::detail::draw_unit(rng, p))});
        }
        {
            auto s = random_structured_params(rng, fp); // p | f6
            const i64 k = rng.between(1, 9);
            s.f4 = 1;
            s.f6 = static_cast<i64>(p);
            s.f5 = 1 - s.f6 * k;
            s.f7 = k;
            tuples.push_back({s, 1});
        }
        Row row{0, 0, 0, 0.0, 0.0};
        for (auto [s, q] : tuples) {
            const double bound = perelmuter_bound(p, s.g4);
            for (u64 a = 0; a < p; ++a)
                for (u64 v = 0; v < p; ++v) {
                    s.a = static_cast<i64>(a);
                    s.v = static_cast<i64>(v);
                    const double mag = std::abs(mixed_sum_eval(p, 1, s, q));
                    row.worst = std::max(row.worst, mag / bound);
                    if (v == 0)
                        row.worst_v0 = std::max(row.worst_v0, mag / bound);
                    row.violations += mag > bound * (1.0 + 1e-12);
                    // with v != 0, f also has a pole at infinity: (M + N - 1) = 2 + 3 - 1
                    row.violations_four += mag > bound * 4.0 / 3.0 * (1.0 + 1e-12);
                    ++row.evaluations;
                }
        }
        return row;
    });
    u64 evals = 0, violations = 0, violations_four = 0;
    double worst = 0.0, worst_v0 = 0.0;
    for (const auto& r : rows) {
        evals += r.evaluations;
        violations += r.violations;
        violations_four += r.violations_four;
        worst = std::max(worst, r.worst);
        worst_v0 = std::max(worst_v0, r.worst_v0);
    }
    return {violations == 0, std::to_string(primes.size()) + " primes, " + std::to_string(evals) +
                                 " sums; violations of 3 sqrt(p) (p,g4)^(1/2) = " + std::to_string(violations) +
                                 ", max |S|/bound = " + fmt("%.4f", worst) + " (v = 0 mod p only: " +
                                 fmt("%.4f", worst_v0) + "); violations of 4 sqrt(p) (p,g4)^(1/2) = " +
                                 std::to_string(violations_four)};
}

// 6. Bilinear form against an independent triple loop.

oracle::cplx sigma_oracle(const BilinearInstance& b)
{
    const u64 r = b.r.value();
    std::vector<std::vector<u64>> table(r);
    for (u64 k = 0; k < r; ++k)
        table[k * k % r].push_back(k);
    oracle::cplx s = 0;
    for (i64 l = -static_cast<i64>(b.L); l <= static_cast<i64>(b.L); ++l)
        for (u64 m = 1; m <= b.M; ++m)
            for (u64 k : table[oracle::md(static_cast<__int128>(b.j) * m, r)]) {
                const Complex c = b.alpha_at(l) * b.beta[m - 1];
                s += oracle::cplx(c.real(), c.imag()) *
                     oracle::e(static_cast<long double>(oracle::md(static_cast<__int128>(l) * k, r)) / r +
                               static_cast<long double>(l) * b.f(m));
            }
    return s;
}

Outcome bilinear_oracle()
{
    const std::size_t n = 1000;
    const auto seeds = cli::detail::derive_seeds(0xB1u, n);
    const auto devs = parallel_map<double>(n, threads(), [&](std::size_t i) {
        SplitMix64 rng(seeds[i]);
        BilinearInstance b;
        const u64 r = 2 * rng.between(1, 127) + 1;
        b.r = factorize(r);
        b.j = static_cast<i64>(cli::detail::draw_unit(rng, r)) - static_cast<i64>(rng.below(2) * r);
        b.L = static_cast<u64>(rng.between(1, static_cast<i64>(r)));
        b.M = static_cast<u64>(rng.between(1, static_cast<i64>(r)));
        const double inv_L = 1.0 / static_cast<double>(b.L);
        switch (i % 3) {
        case 0:
            b.f = PhaseSpec::zero();
            break;
        case 1:
            b.f = PhaseSpec::scaled_sqrt(2.0 * inv_L * rng.uniform());
            break;
        default: {
            std::vector<double> table(b.M);
            double x = rng.uniform();
            for (auto& t : table) {
                t = x;
                x += inv_L * (2.0 * rng.uniform() - 1.0);
            }
            b.f = PhaseSpec::tabulated(table);
        }
        }
        b.F = std::min(inv_L, b.f.derivative_sup(b.M));
        b.H = static_cast<u64>(rng.between(1, static_cast<i64>(std::floor(h_ceiling(b.L, b.F, b.M)))));
        b.alpha = random_unit_phases(2 * b.L + 1, rng);
        b.beta = random_unit_phases(b.M, rng);
        for (auto& z : b.alpha)
            z *= 3.0 * rng.uniform();
        const Complex got = sigma_eval(b);
        return std::abs(oracle::cplx(got.real(), got.imag()) - sigma_oracle(b)) /
               static_cast<double>(b.L * b.M);
    });
    const double worst = *std::max_element(devs.begin(), devs.end());
    return {worst <= 1e-6, "10^3 instances, r <= 255; max deviation/(L M) = " + fmt("%.3g", worst)};
}

// 7. |Sigma| against the Theorem 2 bound over two decades of r.

Outcome thm2_sweep()
{
    const std::size_t per_decade = 100;
    const auto seeds = cli::detail::derive_seeds(0x7E2u, 2 * per_decade);
    struct Row
    {
        u64 r;
        bool heavy;
        double worst;
        int cells;
    };
    const auto rows = parallel_map<Row>(2 * per_decade, threads(), [&](std::size_t i) {
        SplitMix64 rng(seeds[i]);
        const bool high = i >= per_decade;
        const u64 lo = high ? 1000 : 101, hi = high ? 9999 : 999;
        u64 r = cli::detail::draw_log_uniform_odd(rng, lo, hi);
        bool heavy = false;
        if (i % 2 == 1)
            if (auto h = cli::detail::draw_squarefull_heavy(rng, lo, hi)) {
                r = *h;
                heavy = true;
            }
        const auto fr = factorize(r);
        const i64 j = static_cast<i64>(cli::detail::draw_unit(rng, r));
        const double rd = static_cast<double>(r);
        Row row{r, heavy, 0.0, 0};
        for (u64 L : {static_cast<u64>(std::ceil(std::pow(rd, 0.25))), static_cast<u64>(std::ceil(std::sqrt(rd)))})
            for (u64 M : {static_cast<u64>(std::ceil(std::sqrt(rd))), static_cast<u64>(std::ceil(std::pow(rd, 0.75))),
                          (r - 1) / 2})
                for (int fk = 0; fk < 2; ++fk) {
                    BilinearInstance b;
                    b.r = fr;
                    b.j = j;
                    b.L = L;
                    b.M = std::min(M, (r - 1) / 2);
                    b.f = fk == 0 ? PhaseSpec::zero() : PhaseSpec::scaled_sqrt(1.0 / static_cast<double>(L));
                    b.F = b.f.derivative_sup(b.M);
                    b.H = static_cast<u64>(std::floor(h_ceiling(b.L, b.F, b.M)));
                    b.alpha = random_unit_phases(2 * L + 1, rng);
                    b.beta = random_unit_phases(b.M, rng);
                    const double ratio = std::abs(sigma_eval(b)) / bound_thm2(b, b.H).min;
                    row.worst = std::max(row.worst, ratio);
                    ++row.cells;
                }
        return row;
    });
    double low = 0.0, high = 0.0;
    int cells = 0, heavy = 0;
    std::set<u64> distinct;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        (i < per_decade ? low : high) = std::max(i < per_decade ? low : high, rows[i].worst);
        cells += rows[i].cells;
        heavy += rows[i].heavy;
        distinct.insert(rows[i].r);
    }
    const bool ok = std::max(low, high) <= 100.0 && high <= low;
    return {ok, std::to_string(rows.size()) + " sampled r (" + std::to_string(distinct.size()) + " distinct, " +
                    std::to_string(heavy) + " squarefull-heavy), " + std::to_string(cells) +
                    " cells; max ratio r~10^3 = " + fmt("%.4f", low) + ", r~10^4 = " + fmt("%.4f", high)};
}

// 8. Farey counts against exhaustive search, then the Theorem 3 sweep at N = Q^3.

Outcome farey_and_thm3()
{
    std::ostringstream os;
    bool ok = true;

    // counts: alpha and Delta on a 2^-30 grid, so the doubles are exact and the oracle's
    // integer arithmetic stays in range
    const i64 unit = i64{1} << 30;
    SplitMix64 rng(0xFA7E);
    u64 mismatches = 0;
    for (int qi = 0; qi < 200; ++qi) {
        const u64 Q = static_cast<u64>(rng.between(1, 60));
        const i64 an = rng.between(-unit, 2 * unit);
        const double log_delta = std::log(1e-5) + rng.uniform() * (std::log(1e-2) - std::log(1e-5));
        const i64 dn = std::max<i64>(1, static_cast<i64>(std::exp(log_delta) * static_cast<double>(unit)));
        const double alpha = static_cast<double>(an) / static_cast<double>(unit);
        const double Delta = static_cast<double>(dn) / static_cast<double>(unit);
        const u64 got = farey_count(FareyQuery{Q, Delta, alpha, std::nullopt});
        mismatches += got != oracle::farey(Q, an, unit, dn, unit);
    }
    ok = ok && mismatches == 0;
    os << "farey: 200 queries, mismatches = " << mismatches;

    // sweep: every odd squarefree r in [Q^0.6, Q^0.9] and every admissible b; exact maximum over
    // the z-window from the breakpoints
    const std::vector<u64> Qs{16, 24, 32, 48, 64};
    struct Cell
    {
        u64 Q, r;
        double ratio, q716;
    };
    std::vector<std::pair<u64, u64>> jobs;
    for (u64 Q : Qs) {
        const double lo = std::pow(static_cast<double>(Q), 0.6), hi = std::pow(static_cast<double>(Q), 0.9);
        for (u64 r = 3; static_cast<double>(r) <= hi; r += 2)
            if (static_cast<double>(r) >= lo && factorize(r).is_squarefree())
                jobs.push_back({Q, r});
    }
    const auto cells = parallel_map<Cell>(jobs.size(), threads(), [&](std::size_t i) {
        const auto [Q, r] = jobs[i];
        const auto fr = factorize(r);
        const MobiusTable mobius(Q);
        u64 best = 0;
        for (u64 b = 1; b < r; ++b)
            if (std::gcd(b, r) == 1)
                best = std::max(best, farey_max_over_z(Q, Q * Q * Q, static_cast<i64>(b), fr, mobius).count);
        const double Qd = static_cast<double>(Q);
        return Cell{Q, r, static_cast<double>(best) / thm3_bound(Qd, fr), static_cast<double>(best) / std::pow(Qd, 7.0 / 16)};
    });
    std::map<u64, double> per_Q;
    double worst = 0.0;
    for (const auto& c : cells) {
        per_Q[c.Q] = std::max(per_Q[c.Q], c.ratio);
        worst = std::max(worst, c.ratio);
    }
    const double small = std::max(per_Q[Qs[0]], per_Q[Qs[1]]), large = std::max(per_Q[Qs[3]], per_Q[Qs[4]]);
    ok = ok && worst <= 100.0 && large <= small;
    os << "; thm3: " << cells.size() << " (Q, r) cells, max P/bound = " << fmt("%.4f", worst)
       << ", Q in {16,24}: " << fmt("%.4f", small) << ", Q in {48,64}: " << fmt("%.4f", large)
       << "; r nearest Q^(3/4), P/Q^(7/16):";
    for (u64 Q : Qs) {
        const double target = std::pow(static_cast<double>(Q), 0.75);
        const Cell* near = nullptr;
        for (const auto& c : cells)
            if (c.Q == Q && (!near || std::abs(static_cast<double>(c.r) - target) < std::abs(static_cast<double>(near->r) - target)))
                near = &c;
        if (near)
            os << " Q=" << Q << " r=" << near->r << " " << fmt("%.3f", near->q716);
    }
    return {ok, os.str()};
}

// 9. Classical large sieve, constant 1.

Outcome classical_sieve()
{
    const std::size_t n = 100;
    const auto seeds = cli::detail::derive_seeds(0x15u, n);
    struct Row
    {
        u64 violations;
        double worst;
    };
    const auto rows = parallel_map<Row>(n, threads(), [&](std::size_t i) {
        SplitMix64 rng(seeds[i]);
        LsInstance inst;
        inst.Q = static_cast<u64>(rng.between(1, 12));
        inst.N = static_cast<u64>(rng.between(1, 300));
        inst.M_offset = rng.between(-1000, 1000);
        for (u64 k = 0; k < inst.N; ++k)
            inst.coeffs.push_back(i % 4 == 0 ? Complex{1.0, 0.0} : Complex{2 * rng.uniform() - 1, 2 * rng.uniform() - 1});
        const double Z = inst.Z();
        const u64 Q2 = static_cast<u64>(rng.between(1, 40));
        const double generic = ls_quadform_generic(inst, Q2);
        const double square = ls_quadform_square_moduli(inst);
        const double b_generic = classical_sieve_bound(inst.N, Q2, Z);
        const double b_square = classical_sieve_bound(inst.N, inst.Q * inst.Q, Z);
        return Row{static_cast<u64>(generic > b_generic) + static_cast<u64>(square > b_square),
                   std::max(generic / b_generic, square / b_square)};
    });
    u64 violations = 0;
    double worst = 0.0;
    for (const auto& r : rows) {
        violations += r.violations;
        worst = std::max(worst, r.worst);
    }
    return {violations == 0, "100 instances (generic and square moduli); violations = " + std::to_string(violations) +
                                 ", max lhs/((N+Q^2-1)Z) = " + fmt("%.4f", worst)};
}

// 10. Same seed, same bytes, for every command, across thread counts.

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int shell(const std::string& cmd)
{
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism()
{
    const auto dir = std::filesystem::temp_directory_path() / "sqsieve_acceptance";
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> grids{
        {"gauss-verify", "c_max = 61\n"},
        {"sqrt-verify", "r_max = 301\n"},
        {"expsum-verify", "tuples = 20\nr_max = 2000\nprime_powers = [27, 125]\ncochrane_tuples = 5\nperelmuter_p_max = 13\n"},
        {"bilinear-sweep", "r_min = 101\nr_max = 401\nsamples = 4\n"},
        {"farey-count", "Q_max = 30\nqueries = 50\n"},
        {"sieve-sweep", "Q = [2, 3]\ninstances = 2\n"},
        {"thm3-sweep", "Q = [16, 24]\nr_per_Q = 2\n"},
    };
    u64 compared = 0, differing = 0, failed_runs = 0;
    for (const auto& [command, grid] : grids) {
        const auto cfg = dir / (command + ".toml");
        std::ofstream(cfg) << "command = \"" << command << "\"\nseed = 4242\n\n[grid]\n" << grid;
        for (const char* format : {"csv", "json"}) {
            std::vector<std::string> outputs;
            for (const char* t : {"1", "1", "3"}) {
                const auto out = dir / (command + "." + format + "." + std::to_string(outputs.size()));
                std::filesystem::remove(out);
                const int code = shell(std::string(SQSIEVE_CLI_PATH) + " --config " + cfg.string() + " --format " + format +
                                       " --threads " + t + " --out " + out.string());
                failed_runs += code != 0;
                outputs.push_back(slurp(out));
            }
            // the in-process runner must produce the same bytes as the binary
            std::istringstream text("command = \"" + command + "\"\nseed = 4242\n\n[grid]\n" + grid);
            auto ec = cli::make_config(cli::parse_config(text, "inline"), std::nullopt, std::nullopt, std::nullopt,
                                       std::string(format), 2u);
            outputs.push_back(cli::run(ec).rendered);
            for (std::size_t k = 1; k < outputs.size(); ++k) {
                ++compared;
                differing += outputs[k] != outputs[0] || outputs[0].empty();
            }
        }
    }
    std::filesystem::remove_all(dir);
    return {differing == 0 && failed_runs == 0, "7 commands x 2 formats, " + std::to_string(compared) +
                                                    " comparisons; differing = " + std::to_string(differing) +
                                                    ", nonzero exits = " + std::to_string(failed_runs)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, gauss_all_cells}, {2, sqrt_complete},   {3, esum_multiplicative}, {4, cochrane},        {5, perelmuter},
        {6, bilinear_oracle}, {7, thm2_sweep},      {8, farey_and_thm3},      {9, classical_sieve}, {10, determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        if (!selected.empty() && !selected.count(id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
                  << fmt("%.1f", secs) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
