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

#include "kmsum/monte_carlo.hpp"

#include "kmsum/errors.hpp"
#include "kmsum/special_functions.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

namespace kmsum
{
    namespace
    {
        constexpr std::uint32_t philox_m0 = 0xD2511F53u, philox_m1 = 0xCD9E8D57u;
        constexpr std::uint32_t philox_w0 = 0x9E3779B9u, philox_w1 = 0xBB67AE85u;

        // Deterministic fixed-order reduction.
        double pairwise_sum(std::span<const double> x)
        {
            if (x.size() <= 8)
            {
                double s = 0.0;
                for (double v : x)
                    s += v;
                return s;
            }
            const std::size_t h = x.size() / 2;
            return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
        }

        // Calls fn(chunk, begin, end) for every chunk of trials_per_chunk trials. Each chunk owns
        // its substream, so results are independent of scheduling.
        template <typename F>
        void for_each_chunk(std::size_t trials, unsigned threads, F &&fn)
        {
            const std::size_t chunks = (trials + trials_per_chunk - 1) / trials_per_chunk;
            if (chunks > std::size_t{0xffffffffu})
                throw DomainError("monte carlo: too many trials for one stream");
            if (threads == 0)
                threads = std::max(1u, std::thread::hardware_concurrency());
            threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
            std::atomic<std::size_t> next{0};
            auto worker = [&]
            {
                for (std::size_t c = next++; c < chunks; c = next++)
                    fn(static_cast<std::uint32_t>(c), c * trials_per_chunk,
                       std::min(trials, (c + 1) * trials_per_chunk));
            };
            if (threads <= 1)
            {
                worker();
                return;
            }
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back(worker);
        }

        void check_trials(std::size_t trials)
        {
            if (trials < 1)
                throw DomainError("monte carlo: trials must be >= 1");
        }

        EstimateCI mean_ci(double sum, double sum_sq, std::size_t n, double k_sigma)
        {
            const double nd = static_cast<double>(n), mean = sum / nd;
            const double var = n > 1 ? std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0)) : 0.0;
            return {mean, k_sigma * std::sqrt(var / nd), n};
        }

        EstimateCI proportion_ci(std::size_t hits, std::size_t n, double k_sigma)
        {
            const double p = static_cast<double>(hits) / static_cast<double>(n);
            return {p, k_sigma * std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
        }

        bool is_small_integer(double mu) { return mu == std::floor(mu) && mu <= 64.0; }

        // Branch power from mu physical clusters with Gaussian scattering around fixed dominant
        // components: scatter variance per dimension w_hat / (2 mu (1 + kappa)), dominant power
        // kappa w_hat / (1 + kappa) split evenly over clusters and quadratures.
        double cluster_power(const FadingParams &p, double w_hat, Philox4x32 &rng)
        {
            const int clusters = static_cast<int>(p.mu);
            const double sigma = std::sqrt(w_hat / (2.0 * p.mu * (1.0 + p.kappa)));
            const double mean = std::sqrt(p.kappa * w_hat / ((1.0 + p.kappa) * 2.0 * p.mu));
            boost::random::normal_distribution<double> gauss(mean, sigma);
            double w = 0.0;
            for (int i = 0; i < 2 * clusters; ++i)
            {
                const double x = gauss(rng);
                w += x * x;
            }
            return w;
        }

        std::vector<double> chunk_partials(std::size_t trials, unsigned threads,
                                           const std::function<double(Philox4x32 &)> &draw, RngSpec spec,
                                           std::vector<double> &squares)
        {
            const std::size_t chunks = (trials + trials_per_chunk - 1) / trials_per_chunk;
            std::vector<double> sums(chunks, 0.0);
            squares.assign(chunks, 0.0);
            for_each_chunk(trials, threads,
                           [&](std::uint32_t c, std::size_t begin, std::size_t end)
                           {
                               Philox4x32 rng(spec, c);
                               double s = 0.0, q = 0.0;
                               for (std::size_t i = begin; i < end; ++i)
                               {
                                   const double v = draw(rng);
                                   s += v;
                                   q += v * v;
                               }
                               sums[c] = s;
                               squares[c] = q;
                           });
            return sums;
        }
    }

    Philox4x32::Philox4x32(RngSpec spec, std::uint32_t substream)
        : key_{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32)},
          counter_{0u, substream, static_cast<std::uint32_t>(spec.stream_id),
                   static_cast<std::uint32_t>(spec.stream_id >> 32)}
    {
    }

    Philox4x32::block_type Philox4x32::bijection(block_type c, key_type k)
    {
        for (int round = 0; round < 10; ++round)
        {
            const std::uint64_t p0 = std::uint64_t{philox_m0} * c[0];
            const std::uint64_t p1 = std::uint64_t{philox_m1} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += philox_w0;
            k[1] += philox_w1;
        }
        return c;
    }

    Philox4x32::result_type Philox4x32::operator()()
    {
        if (next_ == 4)
        {
            out_ = bijection(counter_, key_);
            if (++counter_[0] == 0)
                throw DomainError("Philox4x32: substream exhausted");
            next_ = 0;
        }
        return out_[next_++];
    }

    double sample_kappa_mu_power(const FadingParams &params, double w_hat, Philox4x32 &rng)
    {
        params.validate();
        if (!(w_hat > 0.0) || !std::isfinite(w_hat))
            throw DomainError("sample_kappa_mu_power: w_hat must be finite and > 0");
        const double lambda = params.kappa * params.mu;
        unsigned long extra = 0;
        if (lambda > 0.0)
            extra = boost::random::poisson_distribution<unsigned long, double>(lambda)(rng);
        const double g = boost::random::gamma_distribution<double>(params.mu + static_cast<double>(extra), 1.0)(rng);
        return g * w_hat / ((1.0 + params.kappa) * params.mu);
    }

    double simulate_mrc_snr(const FadingParams &params, int n, double w_hat, double alpha, Philox4x32 &rng)
    {
        params.validate();
        if (n < 1)
            throw DomainError("simulate_mrc_snr: n must be >= 1");
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw DomainError("simulate_mrc_snr: alpha must lie in [0, 1)");
        if (!(w_hat > 0.0) || !std::isfinite(w_hat))
            throw DomainError("simulate_mrc_snr: w_hat must be finite and > 0");

        const bool physical = is_small_integer(params.mu);
        auto branch_power = [&] { return physical ? cluster_power(params, w_hat, rng) : sample_kappa_mu_power(params, w_hat, rng); };
        if (alpha == 0.0)
        {
            // v = h: the combiner output is the total branch power.
            double total = 0.0;
            for (int i = 0; i < n; ++i)
                total += branch_power();
            return total;
        }

        // Only |h_i| is fixed by the fading law; the phase is uniform.
        boost::random::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::vector<std::complex<double>> h(static_cast<std::size_t>(n));
        double norm2 = 0.0;
        for (auto &hi : h)
        {
            const double w = branch_power();
            hi = std::polar(std::sqrt(w), phase(rng));
            norm2 += w;
        }
        boost::random::normal_distribution<double> gauss(0.0, std::sqrt(norm2 / (2.0 * n)));
        const double a = std::sqrt(1.0 - alpha * alpha);
        std::complex<double> inner = 0.0;
        double v_norm2 = 0.0;
        for (const auto &hi : h)
        {
            const std::complex<double> e(gauss(rng), gauss(rng));
            const std::complex<double> v = a * hi + alpha * e;
            inner += std::conj(v) * hi;
            v_norm2 += std::norm(v);
        }
        return std::norm(inner) / v_norm2;
    }

    std::vector<double> simulate_snr_samples(const SimulationConfig &config)
    {
        check_trials(config.trials);
        std::vector<double> out(config.trials);
        for_each_chunk(config.trials, config.threads,
                       [&](std::uint32_t c, std::size_t begin, std::size_t end)
                       {
                           Philox4x32 rng(config.rng, c);
                           for (std::size_t i = begin; i < end; ++i)
                               out[i] = simulate_mrc_snr(config.params, config.n_branches, config.w_hat,
                                                         config.alpha, rng);
                       });
        return out;
    }

    EstimateCI estimate_cdf(std::span<const double> samples, double w, double k_sigma)
    {
        if (samples.empty())
            throw DomainError("estimate_cdf: no samples");
        const auto hits = static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [w](double x) { return x <= w; }));
        return proportion_ci(hits, samples.size(), k_sigma);
    }

    EstimateCI conditional_bep(std::span<const double> snr, const Modulation &mod, double k_sigma)
    {
        if (snr.empty())
            throw DomainError("conditional_bep: no samples");
        std::vector<double> e(snr.size()), e2(snr.size());
        for (std::size_t i = 0; i < snr.size(); ++i)
        {
            e[i] = 0.5 * erfc(std::sqrt(mod.g_b * snr[i]));
            e2[i] = e[i] * e[i];
        }
        return mean_ci(pairwise_sum(e), pairwise_sum(e2), snr.size(), k_sigma);
    }

    EstimateCI estimate_bep(const FadingParams &params, int n, const LinkBudget &budget, const Modulation &mod,
                            std::size_t trials, RngSpec rng, double k_sigma, unsigned threads)
    {
        check_trials(trials);
        const double w_hat = w_hat_from_budget(budget);
        std::vector<double> squares;
        auto sums = chunk_partials(
            trials, threads,
            [&](Philox4x32 &g) { return 0.5 * erfc(std::sqrt(mod.g_b * simulate_mrc_snr(params, n, w_hat, budget.alpha, g))); },
            rng, squares);
        return mean_ci(pairwise_sum(sums), pairwise_sum(squares), trials, k_sigma);
    }

    EstimateCI estimate_bep_bitflip(const FadingParams &params, int n, const LinkBudget &budget,
                                    const Modulation &mod, std::size_t trials, RngSpec rng, double k_sigma,
                                    unsigned threads)
    {
        check_trials(trials);
        const double w_hat = w_hat_from_budget(budget);
        std::vector<double> squares;
        auto sums = chunk_partials(
            trials, threads,
            [&](Philox4x32 &g)
            {
                const double snr = simulate_mrc_snr(params, n, w_hat, budget.alpha, g);
                const double noise = boost::random::normal_distribution<double>(0.0, 1.0)(g);
                return noise > std::sqrt(2.0 * mod.g_b * snr) ? 1.0 : 0.0;
            },
            rng, squares);
        return proportion_ci(static_cast<std::size_t>(pairwise_sum(sums)), trials, k_sigma);
    }

    struct TabulatedCdf::Impl
    {
        double lo, hi, f_lo, f_hi;
        boost::math::interpolators::cubic_hermite<std::vector<double>> spline;

        // t grid, F(t^2) and its t-derivative 2 t f(t^2).
        Impl(std::vector<double> t, std::vector<double> f, std::vector<double> dfdt)
            : lo(t.front()), hi(t.back()), f_lo(f.front()), f_hi(f.back()),
              spline(std::move(t), std::move(f), std::move(dfdt))
        {
        }
    };

    TabulatedCdf TabulatedCdf::from_series(const SumSpec &spec, double lo, double hi, std::size_t points,
                                           const TruncationPolicy &policy)
    {
        if (points < 2 || !(lo >= 0.0) || !(hi > lo))
            throw DomainError("TabulatedCdf: need points >= 2 and 0 <= lo < hi");
        std::vector<double> t(points), f(points), d(points);
        const double a = std::sqrt(lo), b = std::sqrt(hi);
        for (std::size_t i = 0; i < points; ++i)
        {
            t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
            f[i] = cdf(spec, t[i] * t[i], policy).value;
            d[i] = 2.0 * t[i] * pdf(spec, t[i] * t[i], policy).value;
        }
        if (!std::isfinite(d[0]))
            d[0] = std::max(0.0, 2.0 * d[1] - d[2]);
        return TabulatedCdf(std::make_shared<const Impl>(std::move(t), std::move(f), std::move(d)));
    }

    TabulatedCdf TabulatedCdf::from_density(const std::function<double(double)> &density, double hi,
                                            std::size_t points)
    {
        if (points < 3 || !(hi > 0.0))
            throw DomainError("TabulatedCdf: need points >= 3 and hi > 0");
        using rule = boost::math::quadrature::gauss<double, 20>;
        auto g = [&](double t) { return t == 0.0 ? 0.0 : 2.0 * t * density(t * t); };
        std::vector<double> t(points), f(points), d(points);
        double acc = 0.0;
        for (std::size_t i = 0; i < points; ++i)
        {
            t[i] = std::sqrt(hi) * static_cast<double>(i) / static_cast<double>(points - 1);
            if (i > 0)
                acc += rule::integrate(g, t[i - 1], t[i]);
            f[i] = acc;
            d[i] = g(t[i]);
        }
        // One-sided limit of 2 t f(t^2) at zero.
        d[0] = std::max(0.0, 2.0 * d[1] - d[2]);
        return TabulatedCdf(std::make_shared<const Impl>(std::move(t), std::move(f), std::move(d)));
    }

    double TabulatedCdf::operator()(double w) const
    {
        const double t = std::sqrt(std::max(w, 0.0));
        if (t <= impl_->lo)
            return t <= 0.0 ? 0.0 : impl_->f_lo;
        if (t >= impl_->hi)
            return impl_->f_hi;
        return std::clamp(impl_->spline(t), 0.0, 1.0);
    }

    double kolmogorov_q(double x)
    {
        if (!(x > 0.0))
            return 1.0;
        if (x < 0.2)
            return 1.0;
        double sum = 0.0, sign = 1.0;
        for (int k = 1; k <= 100; ++k)
        {
            const double t = sign * std::exp(-2.0 * k * k * x * x);
            sum += t;
            if (std::fabs(t) < 1e-16 * std::fabs(sum))
                break;
            sign = -sign;
        }
        return std::clamp(2.0 * sum, 0.0, 1.0);
    }

    KsResult ks_test(std::span<const double> samples, const std::function<double(double)> &cdf)
    {
        if (samples.empty())
            throw DomainError("ks_test: no samples");
        std::vector<double> x(samples.begin(), samples.end());
        std::sort(x.begin(), x.end());
        const double n = static_cast<double>(x.size());
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            const double f = cdf(x[i]);
            d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
        }
        // Stephens' small-sample correction of the limiting distribution.
        const double rn = std::sqrt(n);
        return {d, kolmogorov_q((rn + 0.12 + 0.11 / rn) * d)};
    }
}
