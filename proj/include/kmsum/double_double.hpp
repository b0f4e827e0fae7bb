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

#ifndef KMSUM_DOUBLE_DOUBLE_HPP
#define KMSUM_DOUBLE_DOUBLE_HPP

#include <cmath>

namespace kmsum
{
    // Unevaluated sum hi + lo with |lo| <= ulp(hi)/2, roughly 106 significant bits.
    struct DoubleDouble
    {
        double hi = 0.0;
        double lo = 0.0;

        constexpr DoubleDouble() = default;
        constexpr DoubleDouble(double h) : hi(h) {}
        constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

        double to_double() const { return hi + lo; }
    };

    namespace dd_detail
    {
        inline DoubleDouble two_sum(double a, double b)
        {
            double s = a + b;
            double bb = s - a;
            double e = (a - (s - bb)) + (b - bb);
            return {s, e};
        }

        inline DoubleDouble quick_two_sum(double a, double b)
        {
            double s = a + b;
            return {s, b - (s - a)};
        }

        inline DoubleDouble two_prod(double a, double b)
        {
            double p = a * b;
            return {p, std::fma(a, b, -p)};
        }
    }

    inline DoubleDouble operator-(const DoubleDouble &a) { return {-a.hi, -a.lo}; }

    inline DoubleDouble operator+(const DoubleDouble &a, const DoubleDouble &b)
    {
        using namespace dd_detail;
        DoubleDouble s = two_sum(a.hi, b.hi);
        DoubleDouble t = two_sum(a.lo, b.lo);
        s.lo += t.hi;
        s = quick_two_sum(s.hi, s.lo);
        s.lo += t.lo;
        return quick_two_sum(s.hi, s.lo);
    }

    inline DoubleDouble operator-(const DoubleDouble &a, const DoubleDouble &b) { return a + (-b); }

    inline DoubleDouble operator*(const DoubleDouble &a, const DoubleDouble &b)
    {
        using namespace dd_detail;
        DoubleDouble p = two_prod(a.hi, b.hi);
        p.lo += a.hi * b.lo + a.lo * b.hi;
        return quick_two_sum(p.hi, p.lo);
    }

    inline DoubleDouble operator*(const DoubleDouble &a, double b)
    {
        using namespace dd_detail;
        DoubleDouble p = two_prod(a.hi, b);
        p.lo += a.lo * b;
        return quick_two_sum(p.hi, p.lo);
    }

    inline DoubleDouble operator/(const DoubleDouble &a, const DoubleDouble &b)
    {
        double q1 = a.hi / b.hi;
        DoubleDouble r = a - b * q1;
        double q2 = r.hi / b.hi;
        r = r - b * q2;
        double q3 = r.hi / b.hi;
        DoubleDouble q = dd_detail::quick_two_sum(q1, q2);
        return q + DoubleDouble(q3);
    }

    inline DoubleDouble &operator+=(DoubleDouble &a, const DoubleDouble &b) { return a = a + b; }
    inline DoubleDouble &operator-=(DoubleDouble &a, const DoubleDouble &b) { return a = a - b; }
    inline DoubleDouble &operator*=(DoubleDouble &a, const DoubleDouble &b) { return a = a * b; }
    inline DoubleDouble &operator/=(DoubleDouble &a, const DoubleDouble &b) { return a = a / b; }

    inline DoubleDouble ldexp(const DoubleDouble &a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }
    inline DoubleDouble abs(const DoubleDouble &a) { return a.hi < 0.0 ? -a : a; }
}

#endif
