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

#ifndef KMSUM_DISTRIBUTION_HPP
#define KMSUM_DISTRIBUTION_HPP

#include "kmsum/coefficients.hpp"

#include <cstddef>
#include <memory>
#include <mutex>

namespace kmsum
{
    /// Which series form evaluates a quantity.
    enum class Representation
    {
        automatic,
        standard,
        tilde
    };

    /// Stopping rule for adaptive series truncation.
    struct TruncationPolicy
    {
        double target_tol = 1e-12;    ///< Absolute truncation-error target
        double rel_tol = 0.0;         ///< Optional target relative to the partial sum; the looser of the two wins
        std::size_t eps_start = 64;   ///< First number of terms tried
        std::size_t eps_max = 4096;   ///< Hard limit on the number of terms
        int zeta = 0;                 ///< 0 selects the density-type bound, 1 the distribution-type bound
        std::size_t fixed_terms = 0;  ///< Nonzero: sum exactly this many terms and report the bound there

        void validate() const;
    };

    struct EvalResult
    {
        double value = 0.0;
        std::size_t terms_used = 0;
        double error_bound = 0.0;
        Representation representation = Representation::tilde;
        double log_value = 0.0; ///< ln(value); finite even when value underflows
    };

    /// Owns the two coefficient caches of one (kappa, mu, N) family.
    ///
    /// The per-branch mean power does not enter the coefficients, so every
    /// SumSpec that differs only in w_hat shares one context.
    class SeriesContext
    {
    public:
        SeriesContext(FadingParams params, int n_branches, std::size_t eps_max = CoefficientCache::default_eps_max);

        /// Standard coefficients; throws DomainError for kappa = 0.
        CoefficientCache &standard();
        CoefficientCache &tilde();

        /// Process-wide context for the given family, created on first use.
        static std::shared_ptr<SeriesContext> shared(const FadingParams &params, int n_branches,
                                                     std::size_t eps_max = CoefficientCache::default_eps_max);

    private:
        FadingParams params_;
        int n_;
        std::size_t eps_max_;
        std::once_flag standard_once_, tilde_once_;
        std::unique_ptr<CoefficientCache> standard_, tilde_;
    };

    /// Density of the sum at w >= 0.
    ///
    /// The automatic representation uses the tilde form unless K w / w_hat < 1.
    /// kappa = 0 is evaluated through the Gamma limit regardless of `repr`.
    EvalResult pdf(const SumSpec &spec, double w, const TruncationPolicy &policy = {},
                   Representation repr = Representation::automatic);

    /// Distribution function of the sum, clamped to [0, 1].
    EvalResult cdf(const SumSpec &spec, double w, const TruncationPolicy &policy = {},
                   Representation repr = Representation::automatic);

    /// Laplace transform E[exp(-s W)]. The standard form needs s > K / w_hat.
    EvalResult mgf(const SumSpec &spec, double s, const TruncationPolicy &policy = {},
                   Representation repr = Representation::automatic);

    /// Upper bound on the standard-form tail from term eps onwards (zeta = 0 density, 1 distribution).
    /// Returns +inf when the bound overflows.
    double truncation_bound(const SumSpec &spec, double w, std::size_t eps, int zeta);

    /// Finite bound on the absolute-value sum of the standard-form series.
    double convergence_diag(const SumSpec &spec, double w, int zeta);

    /// Rigorous tail bound of the tilde-form series after eps terms.
    double tilde_tail_bound(const SumSpec &spec, double w, std::size_t eps, int zeta);

    /// Density of one kappa-mu power with mean w_hat, evaluated through I_{mu-1}.
    double oracle_pdf_single(double kappa, double mu, double w_hat, double w);

    /// Gamma density with shape N mu and rate mu / w_hat.
    double gamma_limit_pdf(double mu, int n, double w_hat, double w);
}

#endif
