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

#include "validate.hpp"

#include "kmsum/coefficients.hpp"
#include "kmsum/distribution.hpp"
#include "kmsum/errors.hpp"
#include "kmsum/link_budget.hpp"
#include "kmsum/metrics.hpp"
#include "kmsum/monte_carlo.hpp"
#include "kmsum/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace kmsum::cli
{
    namespace
    {
        double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

        Check at_most(std::string name, double measured, double bound)
        {
            return {std::move(name), measured <= bound, measured, bound};
        }

        Check at_least(std::string name, double measured, double bound)
        {
            return {std::move(name), measured >= bound, measured, bound};
        }

        std::vector<Check> specfun_suite()
        {
            std::vector<Check> c;
            c.push_back(at_most("ln_gamma(1/2)", rel_err(ln_gamma(0.5), 0.5 * std::log(std::numbers::pi)), 1e-15));
            c.push_back(at_most("erfc(1)", rel_err(erfc(1.0), 0.157299207050285130658779364917), 1e-15));
            c.push_back(at_most("P(1, 2) = 1 - exp(-2)", rel_err(reg_gamma_p(1.0, 2.0), -std::expm1(-2.0)), 1e-15));
            c.push_back(at_most("2F1(1, 1; 2; -1/2) = 2 ln(3/2)", rel_err(hyp_2f1(1.0, 1.0, 2.0, -0.5).value(), 2.0 * std::log(1.5)), 1e-14));
            c.push_back(at_most("I_{1/2}(3) closed form",
                                rel_err(bessel_i(0.5, 3.0).value(), std::sqrt(2.0 / (std::numbers::pi * 3.0)) * std::sinh(3.0)), 1e-14));
            const auto shifted = hyp_2f1_shifted(2.5, 3.0, 3.5, -0.8, 12);
            c.push_back(at_most("2F1 shifted batch vs direct (k = 11)",
                                rel_err(shifted[11].value(), hyp_2f1(13.5, 14.0, 14.5, -0.8).value()), 1e-12));
            return c;
        }

        std::vector<Check> coefficients_suite()
        {
            std::vector<Check> c;
            const FadingParams p{1.5, 0.5};
            CoefficientCache cache(CoefficientKind::standard, p, 64);
            cache.ensure(251);
            c.push_back(at_most("memoized fill to 250 terms: recursion bodies", static_cast<double>(cache.eval_count()), 250.0 * 251.0 - 1.0));
            std::uint64_t naive = 0;
            const SignLog k16 = naive_coefficient(CoefficientKind::standard, p, 64, 16, naive);
            c.push_back({"naive recursion at m = 16: bodies", naive == 65535, static_cast<double>(naive), 65535.0});
            c.push_back(at_most("memoized vs naive k_16", rel_err(cache[16].value(), k16.value()), 1e-10));
            return c;
        }

        // Largest absolute deviation of the series density from the single-variate law with
        // (kappa, N mu, N w_hat) over 200 points of [0.01, 5] N w_hat.
        double aggregation_error(const FadingParams &p)
        {
            const SumSpec s(p, 64, 1.0);
            TruncationPolicy policy;
            policy.target_tol = 1e-14;
            policy.eps_max = 500;
            double worst = 0.0;
            for (int i = 0; i < 200; ++i)
            {
                const double w = s.mean() * (0.01 + 4.99 * i / 199.0);
                const double exact = oracle_pdf_single(p.kappa, 64 * p.mu, s.mean(), w);
                worst = std::max(worst, std::fabs(pdf(s, w, policy).value - exact));
            }
            return worst;
        }

        std::vector<Check> distribution_suite()
        {
            std::vector<Check> c;
            for (const FadingParams p : {FadingParams{1e-6, 0.5}, FadingParams{1.5, 0.5}, FadingParams{1.5, 1.0}, FadingParams{1.5, 1.5}})
            {
                char name[96];
                std::snprintf(name, sizeof name, "aggregation oracle max abs error, kappa = %g, mu = %g", p.kappa, p.mu);
                c.push_back(at_most(name, aggregation_error(p), 1e-12));
            }
            const SumSpec s({1.5, 0.5}, 4, 1.0);
            c.push_back(at_most("cdf(0)", cdf(s, 0.0).value, 0.0));
            c.push_back(at_most("1 - cdf(40 N w_hat)", 1.0 - cdf(s, 40.0 * s.mean()).value, 1e-12));
            return c;
        }

        std::vector<Check> metrics_suite()
        {
            std::vector<Check> c;
            const Modulation bpsk = Modulation::of(ModulationKind::bpsk);
            c.push_back(at_most("Rayleigh BPSK limit",
                                rel_err(bep(SumSpec({1e-8, 1.0}, 1, 1.0), bpsk).value, 0.5 * (1.0 - std::sqrt(0.5))), 1e-7));
            c.push_back(at_most("gate argument 0.125", rel_err(bep_gate_argument(SumSpec({1.5, 0.5}, 64, 10.0), bpsk), 0.125), 1e-15));
            TruncationPolicy tight;
            tight.target_tol = 1e-300;
            tight.rel_tol = 1e-12;
            const SumSpec mid({1.5, 0.5}, 8, 2.5);
            c.push_back(at_most("a1 vs a2 at gate argument 0.5",
                                rel_err(bep_series_a1(mid, bpsk, tight).value, bep_series_a2(mid, bpsk, tight).value), 1e-10));
            const double b256 = bep(SumSpec({1.5, 0.5}, 256, w_hat_from_budget(LinkBudget{})), bpsk).value;
            c.push_back(at_least("uplink BEP, N = 256, lower", b256, 4.25e-3));
            c.push_back(at_most("uplink BEP, N = 256, upper", b256, 5.75e-3));
            return c;
        }

        std::vector<Check> mc_suite(std::uint64_t seed, std::size_t trials, unsigned threads)
        {
            std::vector<Check> c;
            const FadingParams p{1.5, 0.5};
            const SumSpec s(p, 64, 1.0);
            const SimulationConfig cfg{p, 64, 1.0, 0.0, trials, {seed, 0}, threads};
            const std::vector<double> x = simulate_snr_samples(cfg);
            const TabulatedCdf F = TabulatedCdf::from_series(s, 0.0, 4.0 * s.mean(), 1500);
            const KsResult ks = ks_test(x, std::cref(F));
            c.push_back(at_least("KS p-value, MRC SNR vs cdf", ks.p_value, 0.01));

            const LinkBudget budget;
            const Modulation bpsk = Modulation::of(ModulationKind::bpsk);
            const EstimateCI est = estimate_bep(p, 64, budget, bpsk, trials, {seed, 1}, 4.0, threads);
            const double exact = bep(SumSpec(p, 64, w_hat_from_budget(budget)), bpsk).value;
            c.push_back(at_most("|BEP MC - series| / 4-sigma half-width", std::fabs(est.estimate - exact) / est.half_width, 1.0));

            SimulationConfig again = cfg;
            again.trials = std::min<std::size_t>(trials, 2 * trials_per_chunk);
            const std::vector<double> y = simulate_snr_samples(again);
            c.push_back({"reproducible stream", std::equal(y.begin(), y.end(), x.begin()), 0.0, 0.0});
            return c;
        }
    }

    bool SuiteReport::passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass; });
    }

    const std::vector<std::string> &suite_names()
    {
        static const std::vector<std::string> names{"specfun", "coefficients", "distribution", "metrics", "mc"};
        return names;
    }

    SuiteReport run_suite(std::string_view suite, std::uint64_t seed, std::size_t trials, unsigned threads)
    {
        SuiteReport r{std::string(suite), {}};
        try
        {
            if (suite == "specfun")
                r.checks = specfun_suite();
            else if (suite == "coefficients")
                r.checks = coefficients_suite();
            else if (suite == "distribution")
                r.checks = distribution_suite();
            else if (suite == "metrics")
                r.checks = metrics_suite();
            else if (suite == "mc")
                r.checks = mc_suite(seed, trials, threads);
            else
                throw std::invalid_argument("unknown suite");
        }
        catch (const std::exception &e)
        {
            r.checks.push_back({std::string("exception: ") + e.what(), false, 0.0, 0.0});
        }
        return r;
    }
}
