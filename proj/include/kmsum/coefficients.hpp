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

#ifndef KMSUM_COEFFICIENTS_HPP
#define KMSUM_COEFFICIENTS_HPP

#include "kmsum/sign_log.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

namespace kmsum
{
    /// Shape parameters of one kappa-mu fading branch.
    struct FadingParams
    {
        double kappa = 0.0; ///< Power ratio of dominant to scattered components
        double mu = 1.0;    ///< Number of multipath clusters

        /// Throws DomainError unless kappa >= 0 and mu > 0.
        void validate() const;
    };

    /// N i.i.d. branches with common per-branch mean power.
    class SumSpec
    {
    public:
        SumSpec(FadingParams params, int n_branches, double w_hat);

        const FadingParams &params() const { return params_; }
        double kappa() const { return params_.kappa; }
        double mu() const { return params_.mu; }
        int n_branches() const { return n_; }
        double w_hat() const { return w_hat_; }

        double K() const { return (1.0 + params_.kappa) * params_.mu; }                 ///< (1+kappa) mu
        double K_tilde() const { return K() * (params_.kappa * params_.mu + 1.0); }     ///< K (kappa mu + 1)
        double shape() const { return n_ * params_.mu; }                                ///< N mu
        double poisson_mean() const { return n_ * params_.kappa * params_.mu; }         ///< N kappa mu
        double mean() const { return n_ * w_hat_; }

        SumSpec with_w_hat(double w_hat) const { return SumSpec(params_, n_, w_hat); }

    private:
        FadingParams params_;
        int n_;
        double w_hat_;
    };

    enum class CoefficientKind
    {
        standard, ///< k_m: power-series coefficients in 1/(s w_hat)
        tilde     ///< k~_m: coefficients in K/(K + s w_hat)
    };

    /// Memoized coefficients of one (kind, kappa, mu, N) family.
    ///
    /// Values are produced by the convolution recursion in index order and
    /// never change once published. Working precision starts at double-double
    /// and is raised to MPFR whenever the propagated error estimate of a new
    /// value exceeds about 1e-24 relative; the published values are therefore
    /// independent of the order in which indices are requested.
    ///
    /// Reads of published indices are lock-free. Extension takes an internal
    /// mutex, so one cache may be shared between threads.
    class CoefficientCache
    {
    public:
        static constexpr std::size_t default_eps_max = 4096;
        static constexpr double default_log_cap = 700.0 * 2.302585092994045684;

        CoefficientCache(CoefficientKind kind, FadingParams params, int n_branches,
                         std::size_t eps_max = default_eps_max, double log_cap = default_log_cap);
        CoefficientCache(CoefficientKind kind, const SumSpec &spec, std::size_t eps_max = default_eps_max);
        ~CoefficientCache();

        CoefficientCache(const CoefficientCache &) = delete;
        CoefficientCache &operator=(const CoefficientCache &) = delete;

        /// Coefficient m at extended precision; fills the cache up to m if needed.
        ExtSignLog value(std::size_t m);

        /// Coefficient m rounded to double mantissa.
        SignLog operator[](std::size_t m) { return narrow(value(m)); }

        /// Makes indices 0 ... count-1 available.
        void ensure(std::size_t count);

        /// Number of published coefficients.
        std::size_t size() const { return published_.load(std::memory_order_acquire); }

        /// Recursion terms evaluated since construction or the last reset.
        std::uint64_t eval_count() const { return evals_.load(std::memory_order_relaxed); }
        void reset_instrumentation() { evals_.store(0, std::memory_order_relaxed); }

        CoefficientKind kind() const { return kind_; }
        const FadingParams &params() const { return params_; }
        int n_branches() const { return n_; }
        std::size_t eps_max() const { return eps_max_; }

        /// Bits of the current working precision (106 for double-double).
        long precision_bits() const;

        /// Number of times the working precision was raised.
        int escalations() const;

    private:
        static constexpr std::size_t chunk_size = 256;
        using Chunk = std::array<ExtSignLog, chunk_size>;

        struct Engine;

        CoefficientKind kind_;
        FadingParams params_;
        int n_;
        std::size_t eps_max_;
        double log_cap_;
        std::vector<std::unique_ptr<Chunk>> chunks_;
        std::atomic<std::size_t> published_{0};
        std::atomic<std::uint64_t> evals_{0};
        mutable std::mutex writer_;
        std::unique_ptr<Engine> engine_;

        void extend_locked(std::size_t count);
    };

    /// k_m of the standard family. Requires kappa > 0.
    SignLog k_coeff(CoefficientCache &cache, std::size_t m);

    /// k~_m of the tilde family; nonnegative.
    SignLog tilde_k_coeff(CoefficientCache &cache, std::size_t m);

    /// Zeroes the evaluation counter and keeps the memoized values.
    inline void reset_instrumentation(CoefficientCache &cache) { cache.reset_instrumentation(); }

    /// Plain recursive evaluation without memoization, in double-mantissa
    /// sign-log arithmetic. `evaluations` is incremented once per recursion term.
    SignLog naive_coefficient(CoefficientKind kind, const FadingParams &params, int n_branches, std::size_t m,
                              std::uint64_t &evaluations);

    /// Coefficient magnitude bound 8 N Gamma(mu+m) K~^m / (7 Gamma(m)) for m >= 1.
    SignLog coefficient_magnitude_bound(const FadingParams &params, int n_branches, std::size_t m);
}

#endif
