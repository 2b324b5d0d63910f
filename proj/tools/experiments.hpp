#pragma once

// Seeded verification sweeps behind the sqsieve command-line tool. Each command reads its grid
// from the config, evaluates rows in parallel (every row owns a seed drawn up front, so the
// report does not depend on the thread count) and fills a Report.

#include "config.hpp"
#include "report.hpp"

#include "sqsieve/bilinear.hpp"
#include "sqsieve/expsum.hpp"
#include "sqsieve/gauss.hpp"
#include "sqsieve/gauss_row.hpp"
#include "sqsieve/parallel.hpp"
#include "sqsieve/rng.hpp"
#include "sqsieve/sieve.hpp"
#include "sqsieve/sqrtmod.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sqsieve::cli {

struct ExperimentConfig
{
    std::string command;
    std::uint64_t seed = 1;
    ConfigSection grid;
    std::string output_path;
    std::string format = "csv";
    unsigned threads = 1;
};

inline const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"gauss-verify",   "sqrt-verify", "expsum-verify", "bilinear-sweep",
                                                "farey-count",    "sieve-sweep", "thm3-sweep"};
    return names;
}

/// Library operations exercised by each command.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& command_coverage()
{
    static const std::vector<std::pair<std::string, std::vector<std::string>>> table{
        {"gauss-verify", {"gauss_direct", "gauss_closed_form", "epsilon_c", "GaussRowEvaluator", "jacobi"}},
        {"sqrt-verify", {"sqrt_mod", "sqrt_mod_prime", "sqrt_mod_prime_power", "factorize", "crt_combine", "inv_mod"}},
        {"expsum-verify",
         {"esum_eval", "esum_multiplicativity_check", "esum_prime_power_product", "mixed_sum_eval",
          "partial_sum_alpha", "partial_sums", "critical_points", "paper_critical_cubic", "esum_bound_check",
          "perelmuter_bound", "random_structured_params"}},
        {"bilinear-sweep",
         {"sigma_eval", "energy_count", "energy_profile", "energy_pair_total", "bound_thm1", "bound_thm2",
          "bound_thm2_squarefree_second", "bound_trivial", "read_coefficients", "random_unit_phases", "ones",
          "gcd_average"}},
        {"farey-count", {"farey_count", "farey_count_exact", "lemma41_bound"}},
        {"sieve-sweep",
         {"ls_quadform_square_moduli", "ls_quadform_generic", "classical_sieve_bound", "ls_bound_eval",
          "ls_relation_check"}},
        {"thm3-sweep", {"farey_max_over_z", "thm3_bound", "params_pipeline", "lemma41_bound"}},
    };
    return table;
}

namespace detail {

inline std::vector<std::uint64_t> derive_seeds(std::uint64_t seed, std::size_t n)
{
    SplitMix64 rng(seed);
    std::vector<std::uint64_t> out(n);
    for (auto& s : out)
        s = rng.next();
    return out;
}

/// Odd r drawn log-uniformly from [lo, hi].
inline u64 draw_log_uniform_odd(SplitMix64& rng, u64 lo, u64 hi)
{
    const double x = std::exp(std::log(static_cast<double>(lo)) +
                              rng.uniform() * (std::log(static_cast<double>(hi) + 1.0) - std::log(static_cast<double>(lo))));
    u64 r = std::clamp<u64>(static_cast<u64>(x), lo, hi) | 1;
    if (r > hi)
        r -= 2;
    return r;
}

/// Odd r in [lo, hi] whose squarefull part is at least sqrt(r); nullopt if none was found.
inline std::optional<u64> draw_squarefull_heavy(SplitMix64& rng, u64 lo, u64 hi)
{
    static const u64 primes[] = {3, 5, 7, 11, 13};
    for (int attempt = 0; attempt < 200; ++attempt) {
        const u64 p = primes[rng.below(5)];
        unsigned e_max = 2;
        while (ipow(p, e_max + 1) <= hi)
            ++e_max;
        if (ipow(p, 2) > hi)
            continue;
        const u64 s1 = ipow(p, static_cast<unsigned>(rng.between(2, e_max)));
        const u64 c_lo = (lo + s1 - 1) / s1, c_hi = std::min(hi / s1, s1);
        if (c_lo > c_hi)
            continue;
        const u64 c = static_cast<u64>(rng.between(static_cast<i64>(c_lo), static_cast<i64>(c_hi)));
        if (c % 2 == 0 || c % p == 0)
            continue;
        const auto f = factorize(c * s1);
        if (f.squarefull_part() * f.squarefull_part() >= f.value())
            return c * s1;
    }
    return std::nullopt;
}

inline u64 draw_unit(SplitMix64& rng, u64 r)
{
    if (r == 1)
        return 1;
    for (;;) {
        const u64 x = rng.below(r);
        if (std::gcd(x, r) == 1)
            return x;
    }
}

// Exhaustive root lists: roots[s] = {k : k^2 = s mod r}.
inline std::vector<std::vector<u64>> exhaustive_roots(u64 r)
{
    std::vector<std::vector<u64>> roots(r);
    for (u64 k = 0; k < r; ++k)
        roots[(k * k) % r].push_back(k);
    return roots;
}

inline Complex triple_loop_sigma(const BilinearInstance& b)
{
    const u64 r = b.r.value();
    const u64 j = mod_reduce(b.j, r);
    Complex total{};
    for (i64 l = -static_cast<i64>(b.L); l <= static_cast<i64>(b.L); ++l)
        for (u64 m = 1; m <= b.M; ++m)
            for (u64 k = 0; k < r; ++k)
                if ((k * k) % r == (j * m) % r)
                    total += b.alpha_at(l) * b.beta[m - 1] *
                             std::exp(Complex(0.0, 2.0 * std::numbers::pi *
                                                       (static_cast<double>(mod_reduce(l * static_cast<i64>(k), r)) / r +
                                                        static_cast<double>(l) * b.f(m))));
    return total;
}

inline std::vector<Complex> take_coefficients(const std::vector<Complex>& pool, std::size_t n, const std::string& key)
{
    if (pool.size() < n)
        throw InputError("coefficient file for '" + key + "' has " + std::to_string(pool.size()) +
                         " entries, instance needs " + std::to_string(n));
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace detail

// ---------------------------------------------------------------------------------------------

inline Report run_gauss_verify(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const u64 c_min = g.get_u64("c_min", 1);
    const u64 c_max = g.get_u64("c_max", 99);
    const u64 direct_samples = g.get_u64("direct_samples", 16);
    g.check("c_max", c_min >= 1 && c_min <= c_max, "need 1 <= c_min <= c_max");
    g.check("c_max", c_max <= 20000, "c_max above 20000 exceeds the desk-scale budget");
    g.reject_unused("for gauss-verify");

    std::vector<u64> cs;
    for (u64 c = c_min | 1; c <= c_max; c += 2)
        cs.push_back(c);
    const auto seeds = detail::derive_seeds(cfg.seed, cs.size());
    struct Row
    {
        u64 c, cells;
        double max_dev, direct_dev;
    };
    const auto rows = parallel_map<Row>(cs.size(), cfg.threads, [&](std::size_t i) {
        const u64 c = cs[i];
        GaussRowEvaluator ev(c);
        double worst = 0.0;
        for (u64 a = 0; a < c; ++a) {
            const auto row = ev.row(static_cast<i64>(a));
            for (u64 b = 0; b < c; ++b)
                worst = std::max(worst, std::abs(row[b] - gauss_closed_form({static_cast<i64>(a), static_cast<i64>(b), c})));
        }
        SplitMix64 rng(seeds[i]);
        double direct = 0.0;
        for (u64 s = 0; s < direct_samples; ++s) {
            const GaussSumParams p{static_cast<i64>(rng.below(c)), static_cast<i64>(rng.below(c)), c};
            direct = std::max(direct, std::abs(gauss_direct(p) - gauss_closed_form(p)));
        }
        return Row{c, c * c, worst, direct};
    });

    Report rep;
    rep.columns = {"c", "cells", "max_deviation", "direct_samples", "direct_max_deviation", "tolerance", "pass"};
    for (const auto& r : rows) {
        const double tol = 1e-6 * std::sqrt(static_cast<double>(r.c));
        const bool ok = r.max_dev <= tol && r.direct_dev <= tol;
        rep.add({r.c, r.cells, r.max_dev, direct_samples, r.direct_dev, tol, ok});
        rep.summary.record(ok);
        rep.summary.track_max("max_deviation_over_tolerance", std::max(r.max_dev, r.direct_dev) / tol);
    }
    return rep;
}

inline Report run_sqrt_verify(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const u64 r_min = g.get_u64("r_min", 1);
    const u64 r_max = g.get_u64("r_max", 199);
    g.check("r_max", r_min >= 1 && r_min <= r_max, "need 1 <= r_min <= r_max");
    g.check("r_max", r_max <= 20000, "r_max above 20000 exceeds the desk-scale budget");
    g.reject_unused("for sqrt-verify");

    std::vector<u64> rs;
    for (u64 r = r_min | 1; r <= r_max; r += 2)
        rs.push_back(r);
    struct Row
    {
        u64 r, total, mismatches, prime_power_checks;
    };
    const auto rows = parallel_map<Row>(rs.size(), cfg.threads, [&](std::size_t i) {
        const u64 r = rs[i];
        const auto fr = factorize(r);
        const auto oracle = detail::exhaustive_roots(r);
        Row row{r, 0, 0, 0};
        for (u64 s = 0; s < r; ++s) {
            const auto got = sqrt_mod(static_cast<i64>(s), fr);
            row.total += got.size();
            if (got.roots != oracle[s])
                ++row.mismatches;
        }
        if (fr.factors().size() == 1) {
            const auto& f = fr.factors()[0];
            for (u64 s = 0; s < r; ++s) {
                const auto local = (f.e == 1) ? sqrt_mod_prime(static_cast<i64>(s), f.p)
                                              : sqrt_mod_prime_power(static_cast<i64>(s), f.p, f.e);
                if (local.roots != oracle[s])
                    ++row.mismatches;
                ++row.prime_power_checks;
            }
        }
        return row;
    });

    Report rep;
    rep.columns = {"r", "residues", "total_roots", "prime_power_checks", "mismatches", "pass"};
    for (const auto& r : rows) {
        const bool ok = r.mismatches == 0 && r.total == r.r;
        rep.add({r.r, r.r, r.total, r.prime_power_checks, r.mismatches, ok});
        rep.summary.record(ok);
        rep.summary.track_max("mismatches", static_cast<double>(r.mismatches));
    }
    return rep;
}

inline Report run_expsum_verify(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const u64 tuples = g.get_u64("tuples", 100);
    const u64 r_max = g.get_u64("r_max", 3000);
    const auto prime_powers = g.get_u64_list("prime_powers", {27, 81, 125, 343});
    const u64 cochrane_tuples = g.get_u64("cochrane_tuples", 20);
    const u64 perelmuter_p_max = g.get_u64("perelmuter_p_max", 31);
    const u64 perelmuter_tuples = g.get_u64("perelmuter_tuples", 4);
    g.check("r_max", r_max >= 3 && r_max <= 200000, "need 3 <= r_max <= 200000");
    for (u64 pm : prime_powers) {
        const auto f = factorize(pm);
        g.check("prime_powers", pm > 2 && f.factors().size() == 1 && f.factors()[0].e >= 2 && (pm & 1),
                "entries must be odd prime powers p^m with m >= 2, got " + std::to_string(pm));
        g.check("prime_powers", pm <= 20000, "entries above 20000 exceed the desk-scale budget");
    }
    g.check("perelmuter_p_max", perelmuter_p_max <= 200, "perelmuter_p_max above 200 exceeds the budget");
    g.reject_unused("for expsum-verify");

    struct Task
    {
        std::string check;
        u64 modulus;
    };
    std::vector<Task> tasks;
    for (u64 i = 0; i < tuples; ++i)
        tasks.push_back({"multiplicativity", 0});
    for (u64 pm : prime_powers)
        for (u64 i = 0; i < cochrane_tuples; ++i)
            tasks.push_back({"cochrane", pm});
    for (u64 p = 3; p <= perelmuter_p_max; p += 2)
        if (is_prime(p))
            tasks.push_back({"perelmuter", p});
    const auto seeds = detail::derive_seeds(cfg.seed, tasks.size());

    // check, modulus, q, t, critical, measured, bound, ratio, deviation, tolerance, pass
    const auto rows = parallel_map<std::vector<Cell>>(tasks.size(), cfg.threads, [&](std::size_t i) -> std::vector<Cell> {
        SplitMix64 rng(seeds[i]);
        const auto& task = tasks[i];
        if (task.check == "multiplicativity") {
            const u64 r = detail::draw_log_uniform_odd(rng, 3, r_max);
            const auto fr = factorize(r);
            const auto s = random_structured_params(rng, fr);
            const Complex full = esum_eval(s);
            double dev = std::abs(esum_prime_power_product(s) - full);
            const auto& fs = fr.factors();
            for (u64 mask = 0; mask < (u64{1} << fs.size()); ++mask) {
                u64 q1 = 1;
                for (std::size_t k = 0; k < fs.size(); ++k)
                    if (mask >> k & 1)
                        q1 *= fs[k].value();
                dev = std::max(dev, esum_multiplicativity_check(s, q1, r / q1).max_deviation);
            }
            const auto b = esum_bound_check(s);
            const double tol = 1e-6 * std::sqrt(static_cast<double>(r));
            return {std::string("multiplicativity"), r, std::uint64_t{1}, std::int64_t{-1}, std::int64_t{-1},
                    b.measured, b.bound, b.ratio, dev, tol, dev <= tol};
        }
        if (task.check == "cochrane") {
            const auto fpm = factorize(task.modulus);
            const u64 p = fpm.factors()[0].p;
            const unsigned m = fpm.factors()[0].e;
            u64 q = 1;
            do
                q = 2 * rng.below(25) + 1;
            while (q % p == 0);
            ExpSumParams s = random_structured_params(rng, factorize(task.modulus * q));
            // force t' <= m - 2 with a spread of p-adic orders
            const unsigned t = static_cast<unsigned>(rng.below(m - 1));
            const u64 pt = ipow(p, t);
            s.a = static_cast<i64>(pt * rng.below(task.modulus / pt));
            s.v = static_cast<i64>(pt * (1 + rng.below(task.modulus / pt - 1)));
            if (rng.below(2) == 0)
                s.v = static_cast<i64>(pt * rng.below(task.modulus / pt));
            const auto ctx = critical_points(p, m, s, static_cast<i64>(q));
            if (ctx.regime != CochraneRegime::Stationary || ctx.t + 2 > m)
                return {std::string("cochrane"), task.modulus, q, std::int64_t{ctx.t}, std::int64_t{-1}, 0.0, 0.0, 0.0,
                        0.0, 0.0, true};
            const auto partial = partial_sums(p, m, s, static_cast<i64>(q));
            const double tol = 1e-6 * std::sqrt(static_cast<double>(task.modulus));
            double off_critical = 0.0, worst_ratio = 0.0, worst_excess = 0.0;
            for (u64 alpha = 0; alpha < p; ++alpha) {
                const double mag = std::abs(partial[alpha]);
                bool critical = false;
                for (const auto& cp : ctx.critical_points)
                    if (cp.alpha == alpha) {
                        critical = true;
                        const double bound = ctx.alpha_bound(cp.multiplicity);
                        worst_ratio = std::max(worst_ratio, mag / bound);
                        worst_excess = std::max(worst_excess, mag - bound);
                    }
                if (!critical)
                    off_critical = std::max(off_critical, mag);
            }
            const double whole = std::abs(mixed_sum_eval(p, m, s, static_cast<i64>(q)));
            const bool ok = off_critical <= tol && worst_excess <= tol;
            return {std::string("cochrane"), task.modulus, q, std::int64_t{ctx.t},
                    static_cast<std::int64_t>(ctx.critical_points.size()), whole, off_critical, worst_ratio,
                    std::max(off_critical, worst_excess), tol, ok};
        }
        // Perel'muter: full (a, v) grid mod p for a few structural tuples
        const u64 p = task.modulus;
        double worst = 0.0, worst_abs = 0.0;
        for (u64 k = 0; k < perelmuter_tuples; ++k) {
            ExpSumParams s = random_structured_params(rng, factorize(p));
            if (k % 2 == 1)
                s.g4 = static_cast<i64>(p * (1 + rng.below(3)));
            const i64 q = static_cast<i64>(2 * rng.below(10) + 1);
            if (q % static_cast<i64>(p) == 0)
                continue;
            for (u64 a = 0; a < p; ++a)
                for (u64 v = 0; v < p; ++v) {
                    s.a = static_cast<i64>(a);
                    s.v = static_cast<i64>(v);
                    const double mag = std::abs(mixed_sum_eval(p, 1, s, q));
                    worst = std::max(worst, mag / perelmuter_bound(p, s.g4));
                    worst_abs = std::max(worst_abs, mag);
                }
        }
        return {std::string("perelmuter"), p, std::uint64_t{0}, std::int64_t{0}, std::int64_t{-1}, worst_abs,
                3.0 * std::sqrt(static_cast<double>(p)), worst, 0.0, 0.0, worst <= 1.0};
    });

    Report rep;
    rep.columns = {"check", "modulus", "q", "t", "critical", "measured", "bound", "ratio", "deviation", "tolerance", "pass"};
    for (auto& row : rows) {
        const bool ok = std::get<bool>(row.back());
        const std::string check = std::get<std::string>(row[0]);
        rep.summary.record(ok);
        if (check == "multiplicativity") {
            rep.summary.track_max("lemma33_ratio", std::get<double>(row[7]));
            rep.summary.track_max("multiplicativity_deviation", std::get<double>(row[8]));
        } else if (check == "cochrane") {
            rep.summary.track_max("cochrane_ratio", std::get<double>(row[7]));
        } else {
            rep.summary.track_max("perelmuter_ratio", std::get<double>(row[7]));
        }
        rep.add(row);
    }
    return rep;
}

inline Report run_bilinear_sweep(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const u64 r_min = g.get_u64("r_min", 101);
    const u64 r_max = g.get_u64("r_max", 999);
    const u64 samples = g.get_u64("samples", 12);
    const u64 oracle_max_r = g.get_u64("oracle_max_r", 255);
    const u64 energy_max_r = g.get_u64("energy_max_r", 255);
    const std::string coeffs = g.get_string("coefficients", "random");
    const std::string alpha_file = g.get_string("alpha_file", "");
    const std::string beta_file = g.get_string("beta_file", "");
    g.check("r_max", r_min >= 7 && r_min <= r_max && r_max <= 50000, "need 7 <= r_min <= r_max <= 50000");
    g.check("coefficients", coeffs == "random" || coeffs == "ones", "expected \"random\" or \"ones\"");
    g.reject_unused("for bilinear-sweep");
    const auto alpha_pool = alpha_file.empty() ? std::vector<Complex>{} : read_coefficients(alpha_file);
    const auto beta_pool = beta_file.empty() ? std::vector<Complex>{} : read_coefficients(beta_file);

    const auto seeds = detail::derive_seeds(cfg.seed, samples);
    const auto per_sample = parallel_map<std::vector<std::vector<Cell>>>(samples, cfg.threads, [&](std::size_t i) {
        SplitMix64 rng(seeds[i]);
        u64 r = detail::draw_log_uniform_odd(rng, r_min, r_max);
        std::string kind = "random";
        if (i % 2 == 1)
            if (auto heavy = detail::draw_squarefull_heavy(rng, r_min, r_max)) {
                r = *heavy;
                kind = "squarefull";
            }
        const auto fr = factorize(r);
        const i64 j = static_cast<i64>(detail::draw_unit(rng, r));
        const double rd = static_cast<double>(r);
        const std::vector<u64> Ls{static_cast<u64>(std::ceil(std::pow(rd, 0.25))), static_cast<u64>(std::ceil(std::sqrt(rd)))};
        const std::vector<u64> Ms{static_cast<u64>(std::ceil(std::sqrt(rd))), static_cast<u64>(std::ceil(std::pow(rd, 0.75))),
                                  (r - 1) / 2};
        std::vector<std::vector<Cell>> out;
        for (u64 L : Ls)
            for (u64 M : Ms)
                for (int fk = 0; fk < 2; ++fk) {
                    BilinearInstance b;
                    b.r = fr;
                    b.j = j;
                    b.L = L;
                    b.M = std::min(M, (r - 1) / 2);
                    b.f = fk == 0 ? PhaseSpec::zero() : PhaseSpec::scaled_sqrt(1.0 / static_cast<double>(L));
                    b.F = b.f.derivative_sup(b.M);
                    b.H = static_cast<u64>(std::floor(h_ceiling(b.L, b.F, b.M)));
                    if (!alpha_pool.empty())
                        b.alpha = detail::take_coefficients(alpha_pool, 2 * L + 1, "alpha_file");
                    else
                        b.alpha = coeffs == "ones" ? ones(2 * L + 1) : random_unit_phases(2 * L + 1, rng);
                    if (!beta_pool.empty())
                        b.beta = detail::take_coefficients(beta_pool, b.M, "beta_file");
                    else
                        b.beta = coeffs == "ones" ? ones(b.M) : random_unit_phases(b.M, rng);
                    const double sigma = std::abs(sigma_eval(b));
                    const auto t2 = bound_thm2(b, b.H);
                    const double t1 = bound_thm1(b, b.H);
                    const double triv = bound_trivial(b);
                    double oracle_dev = -1.0;
                    bool ok = true;
                    if (r <= oracle_max_r) {
                        oracle_dev = std::abs(sigma_eval(b) - detail::triple_loop_sigma(b));
                        ok = ok && oracle_dev <= 1e-6 * static_cast<double>(b.L * b.M);
                    }
                    if (r <= energy_max_r && fk == 0) {
                        const auto profile = energy_profile(fr, j, b.M, b.H);
                        u64 total = 0;
                        for (const auto& e : profile) {
                            total += e.count;
                            ok = ok && energy_count(fr, j, b.M, b.H, -e.d).count == e.count;
                        }
                        ok = ok && total == energy_pair_total(fr, j, b.M, b.H);
                    }
                    if (fr.is_squarefree())
                        ok = ok && std::abs(bound_thm2_squarefree_second(b, b.H) - t2.second) <= 1e-9 * t2.second;
                    out.push_back({r, kind, fr.squarefree_part(), fr.squarefull_part(), j, b.L, b.M, b.H,
                                   std::string(fk == 0 ? "zero" : "sqrt"), b.F, gcd_average(fr, b.M), sigma, t1,
                                   t2.first, t2.second, t2.min, triv, sigma / t2.min, sigma / t1, oracle_dev, ok});
                }
        return out;
    });

    Report rep;
    rep.columns = {"r",       "kind",      "s0",         "s1",          "j",          "L",       "M",
                   "H",       "f",         "F",          "gcd_average", "sigma_abs",  "thm1",    "thm2_first",
                   "thm2_second", "thm2_min", "trivial", "ratio_thm2",  "ratio_thm1", "oracle_deviation", "pass"};
    for (const auto& rows : per_sample)
        for (const auto& row : rows) {
            const bool ok = std::get<bool>(row.back());
            rep.summary.record(ok);
            rep.summary.track_max("ratio_thm2", std::get<double>(row[17]));
            rep.summary.track_max("ratio_thm1", std::get<double>(row[18]));
            rep.add(row);
        }
    return rep;
}

// Exhaustive (q, a) scan with exact rational membership.
inline u64 farey_oracle(u64 Q, const Rational& alpha, const Rational& Delta)
{
    u64 count = 0;
    const Rational lo = alpha - Delta, hi = alpha + Delta;
    for (u64 q = 1; q <= Q; ++q) {
        const i128 q2 = static_cast<i128>(q * q);
        const i128 a_min = floor(Rational(q2, 1) * lo) - 1, a_max = floor(Rational(q2, 1) * hi) + 1;
        for (i128 a = a_min; a <= a_max; ++a) {
            const Rational x(a, q2);
            if (lo <= x && x <= hi && std::gcd(static_cast<u64>(a < 0 ? -a : a), q) == 1)
                ++count;
        }
    }
    return count;
}

inline Report run_farey_count(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const u64 Q_max = g.get_u64("Q_max", 60);
    const u64 queries = g.get_u64("queries", 200);
    const double delta_min = g.get_double("delta_min", 1e-5);
    const double delta_max = g.get_double("delta_max", 1e-2);
    g.check("Q_max", Q_max >= 1 && Q_max <= 2000, "need 1 <= Q_max <= 2000");
    g.check("delta_max", delta_min > 0 && delta_min <= delta_max && delta_max <= 1.0, "need 0 < delta_min <= delta_max <= 1");
    g.reject_unused("for farey-count");

    const auto seeds = detail::derive_seeds(cfg.seed, queries);
    const auto rows = parallel_map<std::vector<Cell>>(queries, cfg.threads, [&](std::size_t i) -> std::vector<Cell> {
        SplitMix64 rng(seeds[i]);
        const u64 Q = 1 + rng.below(Q_max);
        const double Delta = delta_min * std::pow(delta_max / delta_min, rng.uniform());
        double alpha = rng.uniform() * 3.0 - 1.0;
        if (i % 4 == 0) { // centre exactly on a fraction a0/q0^2
            const u64 q0 = 1 + rng.below(Q);
            alpha = static_cast<double>(rng.below(q0 * q0)) / static_cast<double>(q0 * q0);
        }
        const FareyQuery query{Q, Delta, alpha, std::nullopt};
        const u64 count = farey_count(query);
        const u64 oracle = farey_oracle(Q, Rational::from_double(alpha), Rational::from_double(Delta));
        const double l41 = lemma41_bound(static_cast<double>(Q), 1.0 / Delta, 1.0, Delta, Delta);
        return {Q, alpha, Delta, count, oracle, l41, static_cast<double>(count) / l41, count == oracle};
    });
    Report rep;
    rep.columns = {"Q", "alpha", "Delta", "count", "oracle", "lemma41_r1", "ratio_lemma41", "pass"};
    for (const auto& row : rows) {
        const bool ok = std::get<bool>(row.back());
        rep.summary.record(ok);
        rep.summary.track_max("ratio_lemma41", std::get<double>(row[6]));
        rep.add(row);
    }
    return rep;
}

inline Report run_sieve_sweep(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const auto Qs = g.get_u64_list("Q", {2, 3, 4, 5, 6});
    const double n_exponent = g.get_double("n_exponent", 3.0);
    const u64 instances = g.get_u64("instances", 3);
    const bool relation = g.get_bool("relation", true);
    const u64 relation_max_Q = g.get_u64("relation_max_Q", 5);
    for (u64 Q : Qs)
        g.check("Q", Q >= 1 && Q <= 40, "entries must lie in [1, 40]");
    g.check("n_exponent", n_exponent >= 0.0 && n_exponent <= 4.0, "need 0 <= n_exponent <= 4");
    g.reject_unused("for sieve-sweep");

    struct Task
    {
        u64 Q, N, instance;
    };
    std::vector<Task> tasks;
    for (u64 Q : Qs)
        for (u64 k = 0; k < instances; ++k)
            tasks.push_back({Q, std::max<u64>(1, static_cast<u64>(std::llround(std::pow(static_cast<double>(Q), n_exponent)))), k});
    const auto seeds = detail::derive_seeds(cfg.seed, tasks.size());
    const auto rows = parallel_map<std::vector<Cell>>(tasks.size(), cfg.threads, [&](std::size_t i) -> std::vector<Cell> {
        const auto& t = tasks[i];
        SplitMix64 rng(seeds[i]);
        LsInstance inst{t.Q, t.N, rng.between(-1000, 1000), {}};
        inst.coeffs.resize(t.N);
        for (auto& c : inst.coeffs)
            c = rng.unit_complex() * (0.25 + rng.uniform());
        const double Z = inst.Z();
        const double form = ls_quadform_square_moduli(inst);
        const double square_bound = classical_sieve_bound(t.N, t.Q * t.Q, Z);
        const double generic = ls_quadform_generic(inst, t.Q);
        const double generic_bound = classical_sieve_bound(t.N, t.Q, Z);
        const auto b = ls_bound_eval(static_cast<double>(t.Q), static_cast<double>(t.N));
        double relation_ratio = -1.0;
        std::uint64_t max_P = 0;
        if (relation && t.Q <= relation_max_Q) {
            const auto rel = ls_relation_check(inst);
            max_P = rel.rhs_max_P;
            relation_ratio = rel.lhs / (rel.Z * static_cast<double>(rel.rhs_max_P));
        }
        const bool ok = form <= square_bound && generic <= generic_bound;
        return {t.Q, t.N, t.instance, Z, form, square_bound, generic, generic_bound, b.original, b.best_known,
                b.conjecture, form / (Z * b.best_known), max_P, relation_ratio, ok};
    });
    Report rep;
    rep.columns = {"Q",        "N",          "instance",   "Z",          "quadform",    "square_classical_bound",
                   "generic",  "generic_classical_bound", "original", "best_known", "conjecture", "ratio_best_known",
                   "max_P",    "ratio_relation", "pass"};
    for (const auto& row : rows) {
        const bool ok = std::get<bool>(row.back());
        rep.summary.record(ok);
        rep.summary.track_max("ratio_best_known", std::get<double>(row[11]));
        rep.summary.track_max("ratio_relation", std::get<double>(row[13]));
        rep.add(row);
    }
    return rep;
}

inline Report run_thm3_sweep(ExperimentConfig& cfg)
{
    auto& g = cfg.grid;
    const auto Qs = g.get_u64_list("Q", {16, 24, 32, 48, 64});
    const double e_min = g.get_double("r_exponent_min", 0.6);
    const double e_max = g.get_double("r_exponent_max", 0.9);
    const u64 r_per_Q = g.get_u64("r_per_Q", 6);
    const u64 b_per_r = g.get_u64("b_per_r", 3);
    const bool squarefree_only = g.get_bool("squarefree_only", true);
    const double cap = g.get_double("ratio_cap", 100.0);
    for (u64 Q : Qs)
        g.check("Q", Q >= 4 && Q <= 256, "entries must lie in [4, 256]");
    g.check("r_exponent_max", 0.0 < e_min && e_min <= e_max && e_max <= 1.5, "need 0 < r_exponent_min <= r_exponent_max <= 1.5");
    g.reject_unused("for thm3-sweep");

    struct Task
    {
        u64 Q, r, b;
    };
    std::vector<Task> tasks;
    SplitMix64 planner(cfg.seed);
    for (u64 Q : Qs) {
        const double Qd = static_cast<double>(Q);
        const u64 lo = std::max<u64>(3, static_cast<u64>(std::ceil(std::pow(Qd, e_min))));
        const u64 hi = static_cast<u64>(std::floor(std::pow(Qd, e_max)));
        std::vector<u64> pool;
        for (u64 r = lo | 1; r <= hi; r += 2)
            if (!squarefree_only || factorize(r).is_squarefree())
                pool.push_back(r);
        // always include the odd r closest to Q^(3/4)
        std::vector<u64> chosen;
        if (!pool.empty()) {
            const double target = std::pow(Qd, 0.75);
            chosen.push_back(*std::min_element(pool.begin(), pool.end(), [&](u64 x, u64 y) {
                return std::abs(static_cast<double>(x) - target) < std::abs(static_cast<double>(y) - target);
            }));
        }
        while (chosen.size() < std::min<std::size_t>(r_per_Q, pool.size())) {
            const u64 r = pool[planner.below(pool.size())];
            if (std::find(chosen.begin(), chosen.end(), r) == chosen.end())
                chosen.push_back(r);
        }
        for (u64 r : chosen)
            for (u64 k = 0; k < b_per_r; ++k) {
                u64 b;
                do
                    b = planner.below(r);
                while (std::gcd(2 * b, r) != 1);
                tasks.push_back({Q, r, b});
            }
    }

    const auto rows = parallel_map<std::vector<Cell>>(tasks.size(), cfg.threads, [&](std::size_t i) -> std::vector<Cell> {
        const auto& t = tasks[i];
        const auto fr = factorize(t.r);
        const u64 N = t.Q * t.Q * t.Q;
        const double Qd = static_cast<double>(t.Q), rd = static_cast<double>(t.r);
        const auto m = farey_max_over_z(t.Q, N, static_cast<i64>(t.b), fr);
        const double bound = thm3_bound(Qd, fr);
        const double z = m.z.to_double();
        const double gamma = std::max(0.0, -std::log(z * rd) / std::log(Qd) - 1.5);
        const auto params = params_pipeline(Qd, fr, gamma);
        const double l41 = lemma41_bound(Qd, static_cast<double>(N), rd, z, 1.0 / static_cast<double>(N));
        const double pred = std::pow(Qd, 7.0 / 16.0);
        const bool near34 = std::abs(std::log(rd) / std::log(Qd) - 0.75) <= 0.05;
        const double ratio = static_cast<double>(m.count) / bound;
        return {t.Q, t.r, t.b, fr.squarefree_part(), fr.squarefull_part(), z, gamma, m.at_lower, m.at_upper, m.count,
                static_cast<std::uint64_t>(m.breakpoints), bound, ratio, l41, static_cast<double>(m.count) / l41, pred,
                static_cast<double>(m.count) / pred, near34, params.valid(), ratio <= cap};
    });
    Report rep;
    rep.columns = {"Q",        "r",          "b",           "s0",         "s1",        "z_max",     "gamma",
                   "P_lower",  "P_upper",    "P_max",       "breakpoints", "thm3",     "ratio_thm3", "lemma41",
                   "ratio_lemma41", "q7_16", "ratio_q7_16", "r_near_q3_4", "pipeline_valid", "pass"};
    for (const auto& row : rows) {
        const bool ok = std::get<bool>(row.back());
        rep.summary.record(ok);
        rep.summary.track_max("ratio_thm3", std::get<double>(row[12]));
        rep.add(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------

enum ExitCode : int
{
    kExitOk = 0,
    kExitMathFailure = 1,
    kExitBadInput = 2,
    kExitIo = 3,
    kExitOversize = 4,
};

inline Report run_command(ExperimentConfig& cfg)
{
    using Runner = Report (*)(ExperimentConfig&);
    static const std::vector<std::pair<std::string, Runner>> runners{
        {"gauss-verify", run_gauss_verify},     {"sqrt-verify", run_sqrt_verify},   {"expsum-verify", run_expsum_verify},
        {"bilinear-sweep", run_bilinear_sweep}, {"farey-count", run_farey_count},   {"sieve-sweep", run_sieve_sweep},
        {"thm3-sweep", run_thm3_sweep},
    };
    for (const auto& [name, fn] : runners)
        if (name == cfg.command) {
            Report rep = fn(cfg);
            rep.command = cfg.command;
            rep.seed = cfg.seed;
            return rep;
        }
    throw InputError("unknown command '" + cfg.command + "'");
}

struct RunResult
{
    int exit_code = kExitOk;
    std::string rendered; // report text, empty on error
    std::string message;  // summary line or error
};

/// Runs one experiment and writes its report to cfg.output_path (if non-empty).
inline RunResult run(ExperimentConfig cfg)
{
    RunResult out;
    try {
        if (cfg.format != "csv" && cfg.format != "json")
            throw InputError("unknown output format '" + cfg.format + "' (expected csv or json)");
        Report rep = run_command(cfg);
        out.rendered = render(rep, cfg.format);
        if (!cfg.output_path.empty())
            write_text(cfg.output_path, out.rendered);
        out.message = summary_line(rep);
        out.exit_code = rep.summary.failed == 0 ? kExitOk : kExitMathFailure;
    } catch (const InputError& e) {
        out = {kExitBadInput, "", std::string("error: ") + e.what()};
    } catch (const IoError& e) {
        out = {kExitIo, "", std::string("I/O error: ") + e.what()};
    } catch (const OversizeError& e) {
        out = {kExitOversize, "", std::string("oversize: ") + e.what()};
    } catch (const std::invalid_argument& e) {
        out = {kExitBadInput, "", std::string("error: ") + e.what()};
    }
    return out;
}

/// Builds a config from a parsed file; explicit overrides (from flags) win over file values.
inline ExperimentConfig make_config(ConfigFile file, std::optional<std::string> command, std::optional<std::uint64_t> seed,
                                    std::optional<std::string> out, std::optional<std::string> format,
                                    std::optional<unsigned> threads)
{
    ExperimentConfig cfg;
    auto& top = file.top;
    cfg.command = top.get_string("command", "");
    cfg.seed = top.get_u64("seed", 1);
    cfg.output_path = top.get_string("output", "");
    cfg.format = top.get_string("format", "csv");
    const std::uint64_t t = top.get_u64("threads", 0);
    top.reject_unused("at top level (expected command, seed, output, format, threads)");
    if (command)
        cfg.command = *command;
    if (seed)
        cfg.seed = *seed;
    if (out)
        cfg.output_path = *out;
    if (format)
        cfg.format = *format;
    cfg.threads = threads ? *threads : (t > 0 ? static_cast<unsigned>(t) : default_thread_count());
    if (cfg.command.empty())
        throw InputError("no command given (set 'command' in the config or pass it on the command line)");
    if (std::find(command_names().begin(), command_names().end(), cfg.command) == command_names().end())
        top.check("command", false, "unknown command '" + cfg.command + "'");
    cfg.grid = std::move(file.grid);
    return cfg;
}

} // namespace sqsieve::cli
