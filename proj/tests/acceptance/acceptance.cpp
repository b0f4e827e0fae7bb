// SPDX-License-Identifier: Apache-2.0
//
// kmsum - exact series evaluation for sums of squared kappa-mu variates
// Copyright (C) 2026 The kmsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
// Acceptance checks. Each criterion prints its individual measurements followed by one
// PASS or FAIL line; the process exit code is non-zero when any requested criterion fails.
//
//   acceptance [criterion ...]      criteria 1 to 9, all when none are given

#include "kmsum/coefficients.hpp"
#include "kmsum/distribution.hpp"
#include "kmsum/errors.hpp"
#include "kmsum/link_budget.hpp"
#include "kmsum/metrics.hpp"
#include "kmsum/monte_carlo.hpp"
#include "kmsum/sign_log.hpp"
#include "kmsum/special_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

using namespace kmsum;

namespace
{
    // Tolerances and sizes, pinned.
    constexpr double exactness_max_abs = 1e-12;
    constexpr double exactness_target_tol = 1e-14;
    constexpr std::size_t exactness_eps_max = 500;
    constexpr double curve_seconds = 1.0;
    constexpr double memo_seconds = 1.0;
    constexpr double coverage_level = 0.99;
    constexpr double coverage_seconds = 10.0;
    constexpr double bep256_lo = 4.25e-3, bep256_hi = 5.75e-3;
    constexpr double bep512_lo = 1.19e-4, bep512_hi = 1.61e-4;
    constexpr double bep_ratio_lo = 30.0, bep_ratio_hi = 42.0;
    constexpr double headroom_target = 1e-3;
    constexpr double headroom_lo = 1.5, headroom_hi = 1.7;
    constexpr double headroom_seconds = 30.0;
    constexpr double dual_rel = 1e-9;
    constexpr double quadrature_rel = 1e-8;
    constexpr double ks_p_min = 0.01;
    constexpr std::size_t ks_samples = 1000000;
    constexpr std::size_t bep_trials = 1000000;
    constexpr double ci_sigmas = 4.0;
    constexpr std::size_t csi_trials = 20000;
    constexpr double csi_rel = 0.02;
    constexpr double asymptote_gap_max = 0.05;
    constexpr double slope_abs = 1e-3;
    constexpr std::uint64_t seed = 20261017;

    const Modulation bpsk = Modulation::of(ModulationKind::bpsk);

    const std::vector<FadingParams> reference_sets{{1e-6, 0.5}, {1.5, 0.5}, {1.5, 1.0}, {1.5, 1.5}};

    class Criterion
    {
    public:
        Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

        void at_most(const std::string &what, double measured, double bound) { record(what, measured <= bound, measured, "<=", bound); }
        void at_least(const std::string &what, double measured, double bound) { record(what, measured >= bound, measured, ">=", bound); }
        void below(const std::string &what, double measured, double bound) { record(what, measured < bound, measured, "<", bound); }
        void holds(const std::string &what, bool ok) { record(what, ok, ok ? 1.0 : 0.0, "==", 1.0); }

        bool finish() const
        {
            std::printf("%s %d %s (%d of %d checks passed)\n", failed_ == 0 ? "PASS" : "FAIL", id_, title_.c_str(),
                        checks_ - failed_, checks_);
            std::fflush(stdout);
            return failed_ == 0;
        }

    private:
        int id_;
        std::string title_;
        int checks_ = 0, failed_ = 0;

        void record(const std::string &what, bool ok, double measured, const char *op, double bound)
        {
            ++checks_;
            failed_ += ok ? 0 : 1;
            std::printf("  [%d] %-4s %s: %.6g %s %.6g\n", id_, ok ? "ok" : "FAIL", what.c_str(), measured, op, bound);
        }
    };

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::string label(const char *fmt, double a, double b = 0.0, double c = 0.0)
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, fmt, a, b, c);
        return buf;
    }

    TruncationPolicy relative(double rel)
    {
        TruncationPolicy p;
        p.target_tol = 1e-300;
        p.rel_tol = rel;
        return p;
    }

    // Uplink defaults with the (1.5, 0.5) fading set, perfect CSI.
    SumSpec uplink(int n, double pt_dbm = 23.0, double fc_hz = 140e9, double distance_m = 200.0)
    {
        LinkBudget b;
        b.pt_dbm = pt_dbm;
        b.fc_hz = fc_hz;
        b.distance_m = distance_m;
        return effective_spec(b, {1.5, 0.5}, n).spec;
    }

    bool exactness()
    {
        Criterion c(1, "series density equals the aggregated single-variate law");
        for (const FadingParams &p : reference_sets)
        {
            const SumSpec s(p, 64, 1.0);
            TruncationPolicy policy;
            policy.target_tol = exactness_target_tol;
            policy.eps_max = exactness_eps_max;
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<double> curve(200);
            for (int i = 0; i < 200; ++i)
                curve[i] = pdf(s, s.mean() * (0.01 + 4.99 * i / 199.0), policy).value;
            const double elapsed = seconds_since(t0);
            double worst = 0.0;
            for (int i = 0; i < 200; ++i)
            {
                const double w = s.mean() * (0.01 + 4.99 * i / 199.0);
                worst = std::max(worst, std::fabs(curve[i] - oracle_pdf_single(p.kappa, 64 * p.mu, s.mean(), w)));
            }
            c.at_most(label("max abs error, kappa = %g, mu = %g", p.kappa, p.mu), worst, exactness_max_abs);
            c.at_most(label("seconds per curve, kappa = %g, mu = %g", p.kappa, p.mu), elapsed, curve_seconds);
        }
        return c.finish();
    }

    bool memoization()
    {
        Criterion c(2, "memoized coefficient recursion complexity");
        const auto t0 = std::chrono::steady_clock::now();
        CoefficientCache cache(CoefficientKind::standard, {1.5, 0.5}, 64);
        cache.ensure(251);
        std::uint64_t naive = 0;
        naive_coefficient(CoefficientKind::standard, {1.5, 0.5}, 64, 16, naive);
        const double elapsed = seconds_since(t0);
        c.at_most("recursion bodies, memoized fill to 250", static_cast<double>(cache.eval_count()), 250.0 * 251.0 - 1.0);
        c.holds(label("recursion bodies, naive at 16 = %g", static_cast<double>(naive)), naive == 65535);
        c.at_most("seconds", elapsed, memo_seconds);
        return c.finish();
    }

    bool coverage_reproduction()
    {
        Criterion c(3, "coverage distances for N = 512");
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto &[th_db, reach] : {std::pair{0.0, 450.0}, std::pair{5.0, 250.0}})
        {
            const SnrThreshold th = SnrThreshold::from_db(th_db);
            auto at = [&](double d) { return coverage(uplink(512, 23.0, 140e9, d), th).value; };
            double prev = 1.0;
            bool monotone = true;
            for (int i = 0; i < 200; ++i)
            {
                const double v = at(10.0 + 990.0 * i / 199.0);
                monotone = monotone && v <= prev + 1e-15;
                prev = v;
            }
            c.at_least(label("coverage at %g m, threshold %g dB", reach, th_db), at(reach), coverage_level);
            c.below(label("coverage at %g m, threshold %g dB", 1.25 * reach, th_db), at(1.25 * reach), coverage_level);
            c.holds(label("non-increasing over [10, 1000] m, threshold %g dB", th_db), monotone);
        }
        c.at_most("seconds for both sweeps", seconds_since(t0), coverage_seconds);
        return c.finish();
    }

    bool bep_reproduction()
    {
        Criterion c(4, "uplink BEP at 23 dBm for N = 256 and 512");
        const double b256 = bep(uplink(256), bpsk).value;
        const double b512 = bep(uplink(512), bpsk).value;
        c.at_least("BEP N = 256", b256, bep256_lo);
        c.at_most("BEP N = 256", b256, bep256_hi);
        c.at_least("BEP N = 512", b512, bep512_lo);
        c.at_most("BEP N = 512", b512, bep512_hi);
        c.at_least("ratio", b256 / b512, bep_ratio_lo);
        c.at_most("ratio", b256 / b512, bep_ratio_hi);
        return c.finish();
    }

    // Carrier frequency where the BEP crosses the target, by bisection in log f_c.
    double crossing_frequency(int n)
    {
        auto excess = [&](double log_fc) { return bep(uplink(n, 23.0, std::exp(log_fc)), bpsk).value - headroom_target; };
        double lo = std::log(1e9), hi = std::log(1e13);
        if (excess(lo) >= 0.0 || excess(hi) <= 0.0)
            throw DomainError("crossing frequency is not bracketed");
        for (int i = 0; i < 80 && hi - lo > 1e-12; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) < 0.0 ? lo : hi) = mid;
        }
        return std::exp(0.5 * (lo + hi));
    }

    bool frequency_headroom()
    {
        Criterion c(5, "carrier-frequency headroom from N = 128 to N = 512");
        const auto t0 = std::chrono::steady_clock::now();
        const double f128 = crossing_frequency(128), f512 = crossing_frequency(512);
        const double elapsed = seconds_since(t0);
        std::printf("  [5] crossing frequencies: N = 128 at %.6g Hz, N = 512 at %.6g Hz\n", f128, f512);
        c.at_least("frequency ratio", f512 / f128, headroom_lo);
        c.at_most("frequency ratio", f512 / f128, headroom_hi);
        c.at_most("seconds", elapsed, headroom_seconds);
        return c.finish();
    }

    // (1/2) E[erfc(sqrt(g_b W))] by adaptive quadrature of the density. The substitution w = t^2
    // removes the endpoint singularity; the range stops where erfc is below 1e-12 of the result.
    double bep_quadrature(const SumSpec &s, const Modulation &mod, double scale)
    {
        const double top = std::sqrt(std::pow(boost::math::erfc_inv(1e-12 * scale), 2) / mod.g_b);
        TruncationPolicy policy;
        policy.target_tol = 1e-16 * scale;
        policy.rel_tol = 1e-13;
        auto f = [&](double t)
        {
            const double w = t * t;
            return w == 0.0 ? 0.0 : t * kmsum::erfc(std::sqrt(mod.g_b * w)) * pdf(s, w, policy).value;
        };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, top, 15, 1e-12);
    }

    bool dual_approach()
    {
        Criterion c(6, "standard and tilde BEP series agree with each other and with quadrature");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_pair = 0.0, worst_quad = 0.0;
        for (int draw = 0; draw < 30; ++draw)
        {
            const FadingParams p{0.05 + 3.0 * u(rng), 0.5 + 1.5 * u(rng)};
            const int n = 1 + static_cast<int>(8 * u(rng));
            const Modulation mod = Modulation::of(static_cast<ModulationKind>(draw % 3));
            const double r = 0.05 + 0.85 * u(rng);
            const SumSpec s(p, n, p.mu * (1.0 + p.kappa) / (mod.g_b * r));
            const double a1 = bep_series_a1(s, mod, relative(1e-13)).value;
            const double a2 = bep_series_a2(s, mod, relative(1e-13)).value;
            const double q = bep_quadrature(s, mod, a2);
            worst_pair = std::max(worst_pair, std::fabs(a1 - a2) / a2);
            worst_quad = std::max({worst_quad, std::fabs(a1 - q) / q, std::fabs(a2 - q) / q});
        }
        c.at_most("max |a1 - a2| / a2 over 30 gated draws", worst_pair, dual_rel);
        c.at_most("max relative deviation from quadrature", worst_quad, quadrature_rel);
        return c.finish();
    }

    // Raw standard-form term m of the density (zeta = 0) or distribution (zeta = 1) series.
    SignLog standard_term(const SumSpec &s, CoefficientCache &cache, double w, std::size_t m, int zeta)
    {
        const double a = s.shape(), md = static_cast<double>(m);
        const double l = a * (std::log(s.K()) - s.kappa()) + (a + md) * std::log(w / s.w_hat()) -
                         (1 - zeta) * std::log(w) - ln_gamma(a + md + zeta);
        return cache[m] * exp_sl(l);
    }

    bool bound_validity()
    {
        Criterion c(7, "truncation bounds dominate the actual tails");
        std::mt19937_64 rng(seed + 7);
        std::uniform_real_distribution<double> u(0.0, 1.0);

        int violations = 0;
        for (int i = 0; i < 20; ++i)
        {
            const SumSpec s({0.2 + 2.8 * u(rng), 0.5 + 1.5 * u(rng)}, 1 + static_cast<int>(8 * u(rng)), 1.0);
            const double w = (0.5 + 7.5 * u(rng)) * s.mean();
            const std::size_t eps = 5 + static_cast<std::size_t>(56 * u(rng));
            const int zeta = i % 2;
            const double bound = truncation_bound(s, w, eps, zeta);
            CoefficientCache cache(CoefficientKind::standard, s.params(), s.n_branches());
            // Sum to eps + 2000, or until the coefficients leave the representable range; the
            // terms are factorially small long before that.
            ExtSignLog tail;
            std::size_t m = eps;
            try
            {
                for (; m <= eps + 2000; ++m)
                    tail += extend(standard_term(s, cache, w, m, zeta));
            }
            catch (const OverflowError &)
            {
            }
            violations += std::fabs(tail.value()) <= bound ? 0 : 1;
        }
        c.at_most("density and distribution tail bound violations in 20 draws", violations, 0.0);

        violations = 0;
        double worst_ratio = 0.0;
        for (int i = 0; i < 20; ++i)
        {
            const FadingParams p{0.1 + 2.9 * u(rng), 0.5 + 1.5 * u(rng)};
            const int n = 1 + static_cast<int>(32 * u(rng));
            const Modulation mod = Modulation::of(static_cast<ModulationKind>(i % 3));
            const double r = 0.05 + 0.85 * u(rng);
            const SumSpec s(p, n, p.mu * (1.0 + p.kappa) / (mod.g_b * r));
            const std::size_t eps = 5 + static_cast<std::size_t>(56 * u(rng));
            TruncationPolicy fixed;
            fixed.fixed_terms = eps;
            // The converged value stands in for 4096 terms: standard coefficients exceed the
            // representable range after a few hundred terms.
            const double limit = bep_series_a2(s, mod, relative(1e-15)).value;
            const double actual = std::fabs(bep_series_a1(s, mod, fixed).value - limit);
            const double bound = bep_truncation_bound(s, mod, eps);
            if (bound < actual)
            {
                ++violations;
                worst_ratio = std::max(worst_ratio, actual / bound);
            }
        }
        c.at_most("BEP series bound violations in 20 gated draws", violations, 0.0);
        if (violations > 0)
            std::printf("  [7] largest actual / bound among violations: %.3g\n", worst_ratio);
        return c.finish();
    }

    bool monte_carlo()
    {
        Criterion c(8, "Monte Carlo agrees with the analysis");
        for (std::size_t k = 0; k < reference_sets.size(); ++k)
        {
            const FadingParams p = reference_sets[k];
            const SumSpec s(p, 64, 1.0);
            const SimulationConfig cfg{p, 64, 1.0, 0.0, ks_samples, {seed, k}, 0};
            const std::vector<double> x = simulate_snr_samples(cfg);
            const TabulatedCdf F = TabulatedCdf::from_series(s, 0.0, 4.0 * s.mean(), 3000);
            const KsResult ks = ks_test(x, std::cref(F));
            c.at_least(label("KS p-value, kappa = %g, mu = %g", p.kappa, p.mu), ks.p_value, ks_p_min);
        }

        const LinkBudget budget;
        const FadingParams p{1.5, 0.5};
        const double exact = bep(SumSpec(p, 64, w_hat_from_budget(budget)), bpsk).value;
        const EstimateCI est = estimate_bep(p, 64, budget, bpsk, bep_trials, {seed, 10}, ci_sigmas);
        std::printf("  [8] BEP N = 64: series %.6g, Monte Carlo %.6g +- %.3g\n", exact, est.estimate, est.half_width);
        c.at_most("|BEP Monte Carlo - series| / 4-sigma half-width", std::fabs(est.estimate - exact) / est.half_width, 1.0);

        const double alpha = 0.4;
        SimulationConfig perfect{p, 512, 1.0, 0.0, csi_trials, {seed, 11}, 0};
        SimulationConfig noisy = perfect;
        noisy.alpha = alpha;
        noisy.rng.stream_id = 12;
        auto mean = [](const std::vector<double> &v)
        {
            double total = 0.0;
            for (double x : v)
                total += x;
            return total / static_cast<double>(v.size());
        };
        const double ratio = mean(simulate_snr_samples(noisy)) / mean(simulate_snr_samples(perfect));
        c.at_most("|mean SNR ratio / (1 - alpha^2) - 1|, N = 512, alpha = 0.4",
                  std::fabs(ratio / (1.0 - alpha * alpha) - 1.0), csi_rel);
        return c.finish();
    }

    bool asymptotics()
    {
        Criterion c(9, "high-SNR asymptotes");
        const SumSpec base({1.5, 0.5}, 4, 10.0);
        const SnrThreshold th(1.0);
        double bep_gap = 0.0, out_gap = 0.0;
        bool bep_shrinks = true, out_shrinks = true;
        for (int k = 0; k <= 8; ++k)
        {
            const SumSpec s = base.with_w_hat(base.w_hat() * std::ldexp(1.0, k));
            const double g_bep = std::fabs(1.0 - bep_asymptotic(s, bpsk) / bep(s, bpsk, relative(1e-13)).value);
            const double g_out =
                std::fabs(1.0 - outage_asymptotic(s, th).value() / cdf(s, th.gamma_th, relative(1e-13)).value);
            if (k > 0)
            {
                bep_shrinks = bep_shrinks && g_bep < bep_gap;
                out_shrinks = out_shrinks && g_out < out_gap;
            }
            bep_gap = g_bep;
            out_gap = g_out;
        }
        c.holds("BEP asymptote gap shrinks over 8 doublings", bep_shrinks);
        c.holds("outage asymptote gap shrinks over 8 doublings", out_shrinks);
        c.below("BEP asymptote relative gap at the top", bep_gap, asymptote_gap_max);
        c.below("outage asymptote relative gap at the top", out_gap, asymptote_gap_max);

        // Slope of the exact BEP deep in the asymptotic regime.
        const SumSpec deep = base.with_w_hat(base.w_hat() * std::ldexp(1.0, 16));
        const double slope = (bep(deep.with_w_hat(2.0 * deep.w_hat()), bpsk, relative(1e-13)).log_value -
                              bep(deep, bpsk, relative(1e-13)).log_value) /
                             std::log(2.0);
        c.at_most("|log-log BEP slope + N mu|", std::fabs(slope + deep.shape()), slope_abs);
        return c.finish();
    }

    using Runner = bool (*)();
    const Runner runners[] = {exactness,  memoization,    coverage_reproduction, bep_reproduction, frequency_headroom,
                              dual_approach, bound_validity, monte_carlo,          asymptotics};
}

int main(int argc, char **argv)
{
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i)
    {
        const int id = std::atoi(argv[i]);
        if (id < 1 || id > 9)
        {
            std::fprintf(stderr, "usage: %s [criterion 1-9 ...]\n", argv[0]);
            return 64;
        }
        ids.push_back(id);
    }
    if (ids.empty())
        for (int id = 1; id <= 9; ++id)
            ids.push_back(id);

    bool ok = true;
    for (int id : ids)
    {
        try
        {
            ok = runners[id - 1]() && ok;
        }
        catch (const std::exception &e)
        {
            std::printf("FAIL %d aborted: %s\n", id, e.what());
            ok = false;
        }
    }
    return ok ? 0 : 1;
}
