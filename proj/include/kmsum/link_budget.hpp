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

#ifndef KMSUM_LINK_BUDGET_HPP
#define KMSUM_LINK_BUDGET_HPP

#include "kmsum/coefficients.hpp"

namespace kmsum
{
    /// Speed of light in vacuum [m/s].
    inline constexpr double speed_of_light = 299792458.0;

    double db_to_linear(double db);
    double linear_to_db(double linear);
    double dbm_to_watts(double dbm);
    double watts_to_dbm(double watts);

    /// Uplink budget with log-distance path loss referenced at 1 m.
    struct LinkBudget
    {
        double pt_dbm = 23.0;               ///< Transmit power
        double fc_hz = 140e9;               ///< Carrier frequency
        double distance_m = 200.0;          ///< User to base-station distance
        double path_loss_exp = 2.0;         ///< beta
        double noise_figure_db = 6.0;       ///< nu
        double bandwidth_fraction = 0.005;  ///< Omega / f_c
        double alpha = 0.0;                 ///< CSI estimation error weight, 0 = perfect CSI

        void validate() const;
        double bandwidth_hz() const { return bandwidth_fraction * fc_hz; }
    };

    /// -174 + 10 log10(Omega) + nu [dBm].
    double noise_power_dbm(const LinkBudget &budget);

    /// (c / (4 pi f_c))^2.
    double path_loss_factor(double fc_hz);

    /// Mean per-branch SNR (P_t / sigma^2) phi d^{-beta}, linear.
    double w_hat_from_budget(const LinkBudget &budget);

    struct EffectiveSpec
    {
        SumSpec spec;
        bool approximate = false; ///< true when N < 32, where the (1 - alpha^2) scaling is only indicative
    };

    /// SumSpec with w_hat scaled by (1 - alpha^2) for imperfect CSI.
    EffectiveSpec effective_spec(const LinkBudget &budget, const FadingParams &params, int n_branches);
}

#endif
