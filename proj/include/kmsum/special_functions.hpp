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

#ifndef KMSUM_SPECIAL_FUNCTIONS_HPP
#define KMSUM_SPECIAL_FUNCTIONS_HPP

#include "kmsum/sign_log.hpp"

#include <span>
#include <vector>

namespace kmsum
{
    /// Natural log of the Gamma function for x > 0.
    double ln_gamma(double x);

    /// ln(x^a e^{-x} / Gamma(a+1)) for a >= 0, x > 0, without cancellation for large a and x.
    double log_gamma_density(double a, double x);

    /// Regularized lower incomplete gamma P(a, x).
    double reg_gamma_p(double a, double x);

    /// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
    double reg_gamma_q(double a, double x);

    /// ln P(a, x); stays finite where P underflows.
    double log_reg_gamma_p(double a, double x);

    /// ln Q(a, x); stays finite where Q underflows.
    double log_reg_gamma_q(double a, double x);

    /// Complementary error function.
    double erfc(double x);

    /// Modified Bessel function of the first kind I_nu(x) for nu > -1, x >= 0.
    SignLog bessel_i(double nu, double x);

    /// Generalized hypergeometric series pFq(a; b; z).
    ///
    /// Summation stops once two consecutive terms fall below tol times the
    /// partial sum while the term ratio is below one.
    SignLog hyp_pfq(std::span<const double> a, std::span<const double> b, double z, double tol = 1e-17);

    /// Gauss hypergeometric function 2F1(a, b; c; z) for z < 1.
    SignLog hyp_2f1(double a, double b, double c, double z);

    /// Values 2F1(a+m, b+m; c+m; z) for m = 0 ... count-1.
    ///
    /// Uses the three-term contiguous recurrence in the stable direction
    /// (backward for z < 1/2, forward otherwise) and reseeds from direct
    /// evaluation when accumulated cancellation exceeds a conditioning threshold.
    std::vector<SignLog> hyp_2f1_shifted(double a, double b, double c, double z, std::size_t count);
}

#endif
