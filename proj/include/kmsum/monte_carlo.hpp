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

#ifndef KMSUM_MONTE_CARLO_HPP
#define KMSUM_MONTE_CARLO_HPP

#include "kmsum/coefficients.hpp"
#include "kmsum/distribution.hpp"
#include "kmsum/link_budget.hpp"
#include "kmsum/metrics.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace kmsum
{
    /// Seed and stream of a reproducible random sequence.
    struct RngSpec
    {
        std::uint64_t seed = 0;
        std::uint64_t stream_id = 0;
    };

    /// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
    /// The seed is the key; stream_id and a 32-bit substream occupy the upper counter words, so
    /// distinct (stream_id, substream) pairs never share a block. Each substream holds 2^32 blocks.
    class Philox4x32
    {
    public:
        using result_type = std::uint32_t;
        using block_type = std::array<std::uint32_t, 4>;
        using key_type = std::array<std::uint32_t, 2>;

        explicit Philox4x32(RngSpec spec = {}, std::uint32_t substream = 0);

        static constexpr result_type min() { return 0; }
        static constexpr result_type max() { return 0xffffffffu; }
        result_type operator()();

        /// Ten rounds of the Philox bijection.
        static block_type bijection(block_type counter, key_type key);

    private:
        key_type key_;
        block_type counter_;
        block_type out_{};
        unsigned next_ = 4;
    };

    /// Estimate with a symmetric confidence half-width of k standard errors.
    struct EstimateCI
    {
        double estimate = 0.0;
        double half_width = 0.0;
        std::size_t n_samples = 0;

        double lower() const { return estimate - half_width; }
        double upper() const { return estimate + half_width; }
        bool contains(double x) const { return x >= lower() && x <= upper(); }
    };

    /// One kappa-mu power with mean w_hat: Gamma(mu + P) w_hat / K with P ~ Poisson(kappa mu).
    double sample_kappa_mu_power(const FadingParams &params, double w_hat, Philox4x32 &rng);

    /// Post-combining SNR of one MRC realisation over n branches with per-branch mean SNR w_hat.
    /// alpha = 0 gives perfect CSI (the exact sum of branch powers); otherwise the combiner uses
    /// sqrt(1 - alpha^2) h + alpha h_e with h_e ~ CN(0, |h|^2 / n) drawn per realisation.
    double simulate_mrc_snr(const FadingParams &params, int n, double w_hat, double alpha, Philox4x32 &rng);

    struct SimulationConfig
    {
        FadingParams params;
        int n_branches = 1;
        double w_hat = 1.0;
        double alpha = 0.0;
        std::size_t trials = 0;
        RngSpec rng;
        unsigned threads = 0; ///< 0 = hardware concurrency
    };

    /// Trials handed to one substream; results do not depend on the thread count.
    inline constexpr std::size_t trials_per_chunk = 4096;

    /// simulate_mrc_snr repeated config.trials times, in trial order.
    std::vector<double> simulate_snr_samples(const SimulationConfig &config);

    /// Empirical P[X <= w] with a binomial half-width.
    EstimateCI estimate_cdf(std::span<const double> samples, double w, double k_sigma = 3.0);

    /// Mean of erfc(sqrt(g_b snr)) / 2 over the given SNR draws.
    EstimateCI conditional_bep(std::span<const double> snr, const Modulation &mod, double k_sigma = 3.0);

    /// Conditional-erfc BEP estimate for the uplink of the given budget.
    EstimateCI estimate_bep(const FadingParams &params, int n, const LinkBudget &budget, const Modulation &mod,
                            std::size_t trials, RngSpec rng, double k_sigma = 3.0, unsigned threads = 0);

    /// BEP from one simulated bit per trial: an error occurs when the Gaussian noise exceeds
    /// sqrt(2 g_b snr). Higher variance than estimate_bep; kept as an independent check.
    EstimateCI estimate_bep_bitflip(const FadingParams &params, int n, const LinkBudget &budget,
                                    const Modulation &mod, std::size_t trials, RngSpec rng, double k_sigma = 3.0,
                                    unsigned threads = 0);

    struct KsResult
    {
        double statistic = 0.0;
        double p_value = 0.0;
    };

    /// CDF held as a piecewise cubic Hermite interpolant in t = sqrt(w), so large goodness-of-fit
    /// samples can be scored without one series evaluation per sample. F stays smooth in t for
    /// shapes down to 1/2. Outside the grid the end values are returned.
    class TabulatedCdf
    {
    public:
        /// Grid on [lo, hi] from the library's cdf and pdf of `spec`.
        static TabulatedCdf from_series(const SumSpec &spec, double lo, double hi, std::size_t points,
                                        const TruncationPolicy &policy = {});

        /// Grid on [0, hi] from a density alone, accumulated with a fixed Gauss rule per cell.
        static TabulatedCdf from_density(const std::function<double(double)> &density, double hi,
                                         std::size_t points);

        double operator()(double w) const;

    private:
        struct Impl;
        explicit TabulatedCdf(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
        std::shared_ptr<const Impl> impl_;
    };

    /// Limiting Kolmogorov tail 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
    double kolmogorov_q(double x);

    /// One-sample Kolmogorov-Smirnov test against a continuous CDF.
    KsResult ks_test(std::span<const double> samples, const std::function<double(double)> &cdf);
}

#endif
