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

#include "kmsum/link_budget.hpp"

#include "kmsum/errors.hpp"

#include <cmath>
#include <numbers>

namespace kmsum
{
    double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
    double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

    void LinkBudget::validate() const
    {
        if (!std::isfinite(pt_dbm))
            throw DomainError("LinkBudget: pt_dbm must be finite");
        if (!(fc_hz > 0.0) || !std::isfinite(fc_hz))
            throw DomainError("LinkBudget: fc_hz must be > 0");
        if (!(distance_m > 0.0) || !std::isfinite(distance_m))
            throw DomainError("LinkBudget: distance_m must be > 0");
        if (!std::isfinite(path_loss_exp) || !std::isfinite(noise_figure_db))
            throw DomainError("LinkBudget: path_loss_exp and noise_figure_db must be finite");
        if (!(bandwidth_fraction > 0.0) || !std::isfinite(bandwidth_fraction))
            throw DomainError("LinkBudget: bandwidth_fraction must be > 0");
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw DomainError("LinkBudget: alpha must lie in [0, 1]");
    }

    double noise_power_dbm(const LinkBudget &budget)
    {
        if (!(budget.bandwidth_hz() > 0.0))
            throw DomainError("noise_power_dbm: bandwidth must be > 0");
        return -174.0 + 10.0 * std::log10(budget.bandwidth_hz()) + budget.noise_figure_db;
    }

    double path_loss_factor(double fc_hz)
    {
        const double r = speed_of_light / (4.0 * std::numbers::pi * fc_hz);
        return r * r;
    }

    double w_hat_from_budget(const LinkBudget &budget)
    {
        budget.validate();
        // Ratio of powers taken in dB first so the mW/W convention cancels exactly.
        const double snr_tx = db_to_linear(budget.pt_dbm - noise_power_dbm(budget));
        return snr_tx * path_loss_factor(budget.fc_hz) * std::pow(budget.distance_m, -budget.path_loss_exp);
    }

    EffectiveSpec effective_spec(const LinkBudget &budget, const FadingParams &params, int n_branches)
    {
        const double scale = 1.0 - budget.alpha * budget.alpha;
        return {SumSpec(params, n_branches, scale * w_hat_from_budget(budget)), n_branches < 32};
    }
}
