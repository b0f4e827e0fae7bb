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

// Adaptive series summation shared by the distribution and metrics modules.

#ifndef KMSUM_SERIES_HPP
#define KMSUM_SERIES_HPP

#include "kmsum/distribution.hpp"
#include "kmsum/errors.hpp"
#include "kmsum/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace kmsum::detail
{
    inline constexpr double inf = std::numeric_limits<double>::infinity();

    struct SeriesOutcome
    {
        ExtSignLog sum;
        std::size_t terms = 0;
        double bound = 0.0;
        double abs_sum = 0.0; ///< sum of |term| over the terms used
    };

    // Finds the smallest term count whose tail bound meets the policy: doubling from
    // eps_start, then bisecting the last bracket. Partial sums are accumulated once,
    // in ascending order, and reused across trials.
    template <typename Term, typename Bound>
    SeriesOutcome sum_adaptive(const TruncationPolicy &policy, Term &&term, Bound &&bound,
                               double cancellation_rel = 0.0)
    {
        std::vector<ExtSignLog> prefix{ExtSignLog()};
        std::vector<SignLog> abs_prefix{SignLog()};
        auto partial = [&](std::size_t eps)
        {
            while (prefix.size() <= eps)
            {
                ExtSignLog t = term(prefix.size() - 1);
                ExtSignLog next = prefix.back() + t;
                prefix.push_back(next);
                abs_prefix.push_back(abs_prefix.back() + narrow(t).abs());
                // The cancellation charge only grows; with a purely absolute target give up early.
                if (policy.rel_tol == 0.0 && cancellation_rel * abs_prefix.back().value() > policy.target_tol)
                    throw NoConvergenceError("standard series: cancellation error exceeds the tolerance; "
                                             "use the tilde form");
            }
            return prefix[eps];
        };
        auto meets = [&](std::size_t eps, double &b)
        {
            b = bound(eps, partial);
            double tol = std::max(policy.target_tol, policy.rel_tol * std::fabs(partial(eps).value()));
            return b <= tol;
        };

        if (policy.fixed_terms > 0)
        {
            double b = bound(policy.fixed_terms, partial);
            ExtSignLog sum = partial(policy.fixed_terms);
            return {sum, policy.fixed_terms, b, abs_prefix[policy.fixed_terms].value()};
        }

        std::size_t lo = 0, eps = std::max<std::size_t>(1, std::min(policy.eps_start, policy.eps_max));
        double b = inf;
        while (!meets(eps, b))
        {
            if (eps >= policy.eps_max)
                throw NoConvergenceError("series: truncation bound " + std::to_string(b) +
                                         " not met within eps_max = " + std::to_string(policy.eps_max) + " terms");
            lo = eps;
            eps = std::min(2 * eps, policy.eps_max);
        }
        std::size_t hi = eps;
        double b_hi = b;
        while (hi - lo > 1)
        {
            std::size_t mid = lo + (hi - lo) / 2;
            double bm = inf;
            if (meets(mid, bm))
            {
                hi = mid;
                b_hi = bm;
            }
            else
                lo = mid;
        }
        ExtSignLog sum = partial(hi);
        return {sum, hi, b_hi, abs_prefix[hi].value()};
    }

    // Coefficients are held to about 1e-24 relative; sign changes in the standard form amplify
    // that by sum|t| / |sum|, so a multiple of sum|t| is charged to the error bound.
    inline constexpr double cancellation_rel = 8e-24;

    inline void charge_cancellation(SeriesOutcome &o, const TruncationPolicy &policy)
    {
        const double rounding = cancellation_rel * o.abs_sum;
        o.bound += rounding;
        const double tol = std::max(policy.target_tol, policy.rel_tol * std::fabs(o.sum.value()));
        if (!(rounding <= tol))
            throw NoConvergenceError("standard series: cancellation error " + std::to_string(rounding) +
                                     " exceeds the tolerance; use the tilde form");
    }

    inline EvalResult make_result(const ExtSignLog &sum, const SeriesOutcome &o, Representation repr, double lo,
                           double hi)
    {
        EvalResult r;
        r.log_value = sum.sign() > 0 ? sum.log_mag() : -inf;
        r.value = std::clamp(sum.sign() > 0 ? sum.value() : 0.0, lo, hi);
        r.terms_used = o.terms;
        r.error_bound = o.bound;
        r.representation = repr;
        return r;
    }

    inline EvalResult closed_result(double log_value, double lo, double hi)
    {
        EvalResult r;
        r.log_value = log_value;
        r.value = std::clamp(std::exp(log_value), lo, hi);
        r.terms_used = 1;
        r.error_bound = 0.0;
        r.representation = Representation::tilde;
        return r;
    }

    inline double log_poisson_tail(double lambda, std::size_t eps)
    {
        // P(X >= eps) for X ~ Poisson(lambda)
        if (eps == 0)
            return 0.0;
        if (lambda == 0.0)
            return -inf;
        return log_reg_gamma_p(static_cast<double>(eps), lambda);
    }
}

#endif
