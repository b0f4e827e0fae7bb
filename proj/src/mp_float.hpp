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

// Minimal RAII wrapper over mpfr_t used by the precision-escalation paths.

#ifndef KMSUM_MP_FLOAT_HPP
#define KMSUM_MP_FLOAT_HPP

#include "kmsum/sign_log.hpp"

#include <mpfr.h>

#include <cstdint>
#include <utility>

namespace kmsum::detail
{
    class MpFloat
    {
    public:
        explicit MpFloat(mpfr_prec_t prec) { mpfr_init2(v_, prec), mpfr_set_zero(v_, 1); }
        MpFloat(mpfr_prec_t prec, double x) { mpfr_init2(v_, prec), mpfr_set_d(v_, x, MPFR_RNDN); }
        MpFloat(const MpFloat &o)
        {
            mpfr_init2(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        MpFloat(MpFloat &&o) noexcept
        {
            mpfr_init2(v_, mpfr_get_prec(o.v_));
            mpfr_swap(v_, o.v_);
        }
        MpFloat &operator=(const MpFloat &o)
        {
            if (this != &o)
            {
                mpfr_set_prec(v_, mpfr_get_prec(o.v_));
                mpfr_set(v_, o.v_, MPFR_RNDN);
            }
            return *this;
        }
        MpFloat &operator=(MpFloat &&o) noexcept
        {
            mpfr_swap(v_, o.v_);
            return *this;
        }
        ~MpFloat() { mpfr_clear(v_); }

        mpfr_ptr get() { return v_; }
        mpfr_srcptr get() const { return v_; }
        mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

        bool is_zero() const { return mpfr_zero_p(v_) != 0; }

        /// Rounds to an ExtSignLog (about 106 significant bits).
        ExtSignLog to_ext() const
        {
            if (mpfr_zero_p(v_))
                return {};
            long e = 0;
            double hi = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
            MpFloat rest(mpfr_get_prec(v_));
            mpfr_set_d(rest.v_, hi, MPFR_RNDN);
            mpfr_mul_2si(rest.v_, rest.v_, e, MPFR_RNDN);
            mpfr_sub(rest.v_, v_, rest.v_, MPFR_RNDN);
            mpfr_mul_2si(rest.v_, rest.v_, -e, MPFR_RNDN);
            double lo = mpfr_get_d(rest.v_, MPFR_RNDN);
            return ExtSignLog(DoubleDouble(hi, lo), static_cast<std::int64_t>(e));
        }

    private:
        mpfr_t v_;
    };
}

#endif
