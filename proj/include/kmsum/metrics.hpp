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

#ifndef KMSUM_METRICS_HPP
#define KMSUM_METRICS_HPP

#include "kmsum/distribution.hpp"

#include <string_view>

namespace kmsum
{
    enum class ModulationKind
    {
        bpsk,
        bfsk_orthogonal,
        bfsk_min_correlation
    };

    /// Coherent binary modulation; g_b scales the SNR inside erfc(sqrt(g_b w)).
    struct Modulation
    {
        ModulationKind name = ModulationKind::bpsk;
        double g_b = 1.0;

        static Modulation of(ModulationKind kind);
    };

    std::string_view to_string(ModulationKind kind);
    ModulationKind parse_modulation(std::string_view name);

    struct SnrThreshold
    {
        double gamma_th = 1.0; ///< linear

        explicit SnrThreshold(double linear);
        static SnrThreshold from_db(double db);
    };

    /// BEP approach carried by a result: the standard series (a1) or the tilde series (a2).
    enum class BepApproach
    {
        a1,
        a2
    };

    BepApproach approach_of(const EvalResult &r);
    std::string_view to_string(BepApproach a);

    /// K / (g_b w_hat), the argument that gates the first BEP series.
    double bep_gate_argument(const SumSpec &spec, const Modulation &mod);

    /// P[SNR > gamma_th] = 1 - F(gamma_th).
    EvalResult coverage(const SumSpec &spec, const SnrThreshold &th, const TruncationPolicy &policy = {});

    /// High-SNR coverage from the leading series term.
    double coverage_asymptotic(const SumSpec &spec, const SnrThreshold &th);

    /// 1 - coverage_asymptotic, kept in sign-log form so it survives far below machine epsilon.
    SignLog outage_asymptotic(const SumSpec &spec, const SnrThreshold &th);

    /// BEP from the standard series; throws GateError unless K / (g_b w_hat) < 1.
    EvalResult bep_series_a1(const SumSpec &spec, const Modulation &mod, const TruncationPolicy &policy = {});

    /// BEP from the tilde series; converges for every valid input.
    EvalResult bep_series_a2(const SumSpec &spec, const Modulation &mod, const TruncationPolicy &policy = {});

    /// Leading-term BEP, Gamma(N mu + 1/2) / (2 sqrt(pi) Gamma(N mu + 1)) (K / (e^kappa g_b w_hat))^{N mu}.
    double bep_asymptotic(const SumSpec &spec, const Modulation &mod);
    SignLog bep_asymptotic_sl(const SumSpec &spec, const Modulation &mod);

    /// a1 when K / (g_b w_hat) <= 0.9, a2 otherwise.
    EvalResult bep(const SumSpec &spec, const Modulation &mod, const TruncationPolicy &policy = {});

    /// 3F2-based truncation bound of the BEP series after eps terms.
    /// Throws DivergenceError when K / (g_b w_hat) >= 1.
    double bep_truncation_bound(const SumSpec &spec, const Modulation &mod, std::size_t eps);

    /// E[erfc(sqrt(g_b W)) / 2] for W ~ Gamma(shape, rate), i.e. the BEP of one mixture component.
    /// Exposed for validation.
    double bep_gamma_component(double shape, double rate, double g_b);
}

#endif
