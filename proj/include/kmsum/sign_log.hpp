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

#ifndef KMSUM_SIGN_LOG_HPP
#define KMSUM_SIGN_LOG_HPP

#include "kmsum/double_double.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace kmsum
{
    namespace sign_log_detail
    {
        template <typename M>
        struct MantissaTraits;

        template <>
        struct MantissaTraits<double>
        {
            // Shifts beyond this leave the smaller addend below half an ulp.
            static constexpr std::int64_t negligible_shift = 60;
            static double lead(double m) { return m; }
            static double scale(double m, int e) { return std::ldexp(m, e); }
            static double to_double(double m) { return m; }
            static double log_abs(double m) { return std::log(std::fabs(m)); }
        };

        template <>
        struct MantissaTraits<DoubleDouble>
        {
            static constexpr std::int64_t negligible_shift = 112;
            static double lead(const DoubleDouble &m) { return m.hi; }
            static DoubleDouble scale(const DoubleDouble &m, int e) { return kmsum::ldexp(m, e); }
            static double to_double(const DoubleDouble &m) { return m.hi + m.lo; }
            static double log_abs(const DoubleDouble &m) { return std::log(std::fabs(m.hi)) + m.lo / m.hi; }
        };

        // Cody-Waite split of ln 2; k * ln2_hi is exact for |k| < 2^21.
        inline constexpr double ln2_hi = 6.93147180369123816490e-01;
        inline constexpr double ln2_lo = 1.90821492927058770002e-10;
        inline constexpr double ln2 = 0.69314718055994530942;
    }

    /// Real number stored as a signed mantissa in [0.5, 1) times 2^exponent.
    ///
    /// The exponent is a 64-bit integer, so products and quotients of Gamma
    /// values far outside the double range stay finite. sign() and log_mag()
    /// give the (sign, natural-log magnitude) view used throughout the library.
    /// The mantissa type selects the working precision: double for SignLog,
    /// DoubleDouble (about 32 digits) for ExtSignLog.
    template <typename M>
    class BasicSignLog
    {
        using Traits = sign_log_detail::MantissaTraits<M>;

    public:
        BasicSignLog() = default;

        explicit BasicSignLog(double x) : mant_(x) { normalize(); }

        BasicSignLog(const M &mantissa, std::int64_t exponent) : mant_(mantissa), exp_(exponent) { normalize(); }

        /// Builds sign * exp(log_mag). sign = 0 or log_mag = -inf gives zero.
        static BasicSignLog from_log(int sign, double log_mag)
        {
            if (sign == 0 || log_mag == -std::numeric_limits<double>::infinity())
                return {};
            if (std::isnan(log_mag))
                return BasicSignLog(std::numeric_limits<double>::quiet_NaN());
            if (std::isinf(log_mag))
                return BasicSignLog(sign > 0 ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity());
            using namespace sign_log_detail;
            double k = std::floor(log_mag / ln2) + 1.0;
            double frac = (log_mag - k * ln2_hi) - k * ln2_lo;
            BasicSignLog r;
            r.mant_ = M(sign > 0 ? std::exp(frac) : -std::exp(frac));
            r.exp_ = static_cast<std::int64_t>(k);
            r.normalize();
            return r;
        }

        int sign() const
        {
            double l = Traits::lead(mant_);
            return l > 0.0 ? 1 : (l < 0.0 ? -1 : 0);
        }

        bool is_zero() const { return Traits::lead(mant_) == 0.0; }
        bool is_finite() const { return std::isfinite(Traits::lead(mant_)); }

        /// Natural log of |x|; -inf for zero.
        double log_mag() const
        {
            if (is_zero())
                return -std::numeric_limits<double>::infinity();
            return Traits::log_abs(mant_) + static_cast<double>(exp_) * sign_log_detail::ln2;
        }

        /// Plain double value; overflows to +-inf and underflows to 0.
        double value() const
        {
            if (is_zero() || !is_finite())
                return Traits::to_double(mant_);
            if (exp_ > 2000)
                return sign() * std::numeric_limits<double>::infinity();
            if (exp_ < -2000)
                return 0.0;
            return std::ldexp(Traits::to_double(mant_), static_cast<int>(exp_));
        }

        const M &mantissa() const { return mant_; }
        std::int64_t exponent() const { return exp_; }

        BasicSignLog abs() const
        {
            BasicSignLog r = *this;
            if (r.sign() < 0)
                r.mant_ = -r.mant_;
            return r;
        }

        BasicSignLog operator-() const
        {
            BasicSignLog r = *this;
            r.mant_ = -r.mant_;
            return r;
        }

        friend BasicSignLog operator*(const BasicSignLog &a, const BasicSignLog &b)
        {
            BasicSignLog r;
            r.mant_ = a.mant_ * b.mant_;
            r.exp_ = a.exp_ + b.exp_;
            r.normalize();
            return r;
        }

        friend BasicSignLog operator/(const BasicSignLog &a, const BasicSignLog &b)
        {
            BasicSignLog r;
            r.mant_ = a.mant_ / b.mant_;
            r.exp_ = a.exp_ - b.exp_;
            r.normalize();
            return r;
        }

        friend BasicSignLog operator*(const BasicSignLog &a, double b) { return a * BasicSignLog(b); }
        friend BasicSignLog operator/(const BasicSignLog &a, double b) { return a / BasicSignLog(b); }

        friend BasicSignLog operator+(const BasicSignLog &a, const BasicSignLog &b)
        {
            if (b.is_zero())
                return a;
            if (a.is_zero())
                return b;
            if (!a.is_finite() || !b.is_finite())
                return BasicSignLog(Traits::to_double(a.mant_) + Traits::to_double(b.mant_));
            const BasicSignLog &big = a.exp_ >= b.exp_ ? a : b;
            const BasicSignLog &small = a.exp_ >= b.exp_ ? b : a;
            std::int64_t shift = big.exp_ - small.exp_;
            if (shift > Traits::negligible_shift)
                return big;
            BasicSignLog r;
            r.mant_ = big.mant_ + Traits::scale(small.mant_, -static_cast<int>(shift));
            r.exp_ = big.exp_;
            r.normalize();
            return r;
        }

        friend BasicSignLog operator-(const BasicSignLog &a, const BasicSignLog &b) { return a + (-b); }

        BasicSignLog &operator+=(const BasicSignLog &b) { return *this = *this + b; }
        BasicSignLog &operator-=(const BasicSignLog &b) { return *this = *this - b; }
        BasicSignLog &operator*=(const BasicSignLog &b) { return *this = *this * b; }
        BasicSignLog &operator/=(const BasicSignLog &b) { return *this = *this / b; }

        /// Three-way comparison of magnitudes: -1, 0, +1 for |a| <, =, > |b|.
        friend int compare_abs(const BasicSignLog &a, const BasicSignLog &b)
        {
            if (a.is_zero() || b.is_zero())
                return a.is_zero() ? (b.is_zero() ? 0 : -1) : 1;
            if (a.exp_ != b.exp_)
                return a.exp_ < b.exp_ ? -1 : 1;
            double x = std::fabs(Traits::to_double(a.mant_)), y = std::fabs(Traits::to_double(b.mant_));
            return x < y ? -1 : (x > y ? 1 : 0);
        }

    private:
        M mant_{};
        std::int64_t exp_ = 0;

        void normalize()
        {
            double lead = Traits::lead(mant_);
            if (lead == 0.0)
            {
                mant_ = M{};
                exp_ = 0;
                return;
            }
            if (!std::isfinite(lead))
                return;
            int e = 0;
            std::frexp(lead, &e);
            if (e != 0)
            {
                mant_ = Traits::scale(mant_, -e);
                exp_ += e;
            }
        }
    };

    using SignLog = BasicSignLog<double>;
    using ExtSignLog = BasicSignLog<DoubleDouble>;

    inline ExtSignLog extend(const SignLog &x) { return ExtSignLog(DoubleDouble(x.mantissa()), x.exponent()); }

    inline SignLog narrow(const ExtSignLog &x)
    {
        return SignLog(x.mantissa().hi + x.mantissa().lo, x.exponent());
    }

    /// |x|^p for x != 0, through the log magnitude; sign of the result is +1.
    template <typename M>
    BasicSignLog<M> pow_abs(const BasicSignLog<M> &x, double p)
    {
        if (x.is_zero())
            return p == 0.0 ? BasicSignLog<M>(1.0) : BasicSignLog<M>();
        return BasicSignLog<M>::from_log(1, p * x.log_mag());
    }

    /// x^n by repeated squaring; keeps full mantissa precision.
    template <typename M>
    BasicSignLog<M> ipow(BasicSignLog<M> x, unsigned long long n)
    {
        BasicSignLog<M> r(1.0);
        while (n)
        {
            if (n & 1ULL)
                r *= x;
            x *= x;
            n >>= 1;
        }
        return r;
    }

    /// e^l as a positive SignLog.
    inline SignLog exp_sl(double l) { return SignLog::from_log(1, l); }
}

#endif
