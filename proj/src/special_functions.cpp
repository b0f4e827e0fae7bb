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

#include "kmsum/special_functions.hpp"
#include "kmsum/errors.hpp"
#include "mp_float.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace kmsum
{
    namespace
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        constexpr double half_ln_2pi = 0.91893853320467274178;
        constexpr double one_minus_euler = 0.42278433509846713939;

        // zeta(k) - 1 for k = 2 ... 41
        constexpr std::array<double, 40> zeta_m1 = {
            6.44934066848226406e-01, 2.02056903159594292e-01, 8.23232337111381857e-02, 3.69277551433699266e-02,
            1.73430619844491402e-02, 8.34927738192282713e-03, 4.07735619794433960e-03, 2.00839282608221426e-03,
            9.94575127818085256e-04, 4.94188604119464529e-04, 2.46086553308048320e-04, 1.22713347578489145e-04,
            6.12481350587048277e-05, 3.05882363070204933e-05, 1.52822594086518710e-05, 7.63719763789976257e-06,
            3.81729326499984022e-06, 1.90821271655393897e-06, 9.53962033872796212e-07, 4.76932986787806447e-07,
            2.38450502727733004e-07, 1.19219925965311064e-07, 5.96081890512594801e-08, 2.98035035146522793e-08,
            1.49015548283650427e-08, 7.45071178983543006e-09, 3.72533402478845728e-09, 1.86265972351304914e-09,
            9.31327432419668166e-10, 4.65662906503378366e-10, 2.32831183367650534e-10, 1.16415501727005193e-10,
            5.82077208790270145e-11, 2.91038504449710001e-11, 1.45519218910419849e-11, 7.27595983505748180e-12,
            3.63797954737865086e-12, 1.81898965030706607e-12, 9.09494784026388841e-13, 4.54747378304215422e-13};

        // B_{2k} / (2k (2k-1)), k = 1 ... 9
        constexpr std::array<double, 9> stirling = {
            8.3333333333333333e-02, -2.7777777777777778e-03, 7.9365079365079365e-04,
            -5.9523809523809524e-04, 8.4175084175084175e-04, -1.9175269175269175e-03,
            6.4102564102564103e-03, -2.9550653594771242e-02, 1.7964437236883057e-01};

        // ln Gamma(2 + z) for |z| <= 1/2
        double ln_gamma_near_two(double z)
        {
            double s = 0.0;
            for (std::size_t i = zeta_m1.size(); i-- > 0;)
            {
                double k = static_cast<double>(i + 2);
                double c = (i % 2 == 0 ? 1.0 : -1.0) * zeta_m1[i] / k;
                s = (s + c) * z;
            }
            return (s + one_minus_euler) * z;
        }

        // ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)], x >= 10
        double stirling_correction(double x)
        {
            double r = 1.0 / x, r2 = r * r, s = 0.0;
            for (std::size_t i = stirling.size(); i-- > 0;)
                s = s * r2 + stirling[i];
            return s * r;
        }

        // log(1 + t) - t
        double log1pmx(double t)
        {
            if (std::fabs(t) > 0.25)
                return std::log1p(t) - t;
            double tk = t * t, s = 0.0;
            for (int k = 2; k < 60; ++k)
            {
                double term = (k % 2 == 0 ? -tk : tk) / k;
                s += term;
                if (std::fabs(term) < 1e-18 * std::fabs(s))
                    break;
                tk *= t;
            }
            return s;
        }

        void require_gamma_args(double a, double x, const char *fn)
        {
            if (!(a > 0.0) || !(x >= 0.0))
                throw DomainError(std::string(fn) + ": requires a > 0 and x >= 0");
        }

        // Series for P(a, x): returns ln of the sum part, sum_k x^k / ((a+1)...(a+k)).
        double log_gamma_p_series(double a, double x)
        {
            double term = 1.0, sum = 1.0;
            for (int k = 1; k < 10'000'000; ++k)
            {
                term *= x / (a + k);
                sum += term;
                if (term < 1e-17 * sum)
                    return std::log(sum);
            }
            throw NoConvergenceError("reg_gamma: series did not converge");
        }

        // Continued fraction for Q(a, x): returns ln of Gamma(a,x) e^x x^{-a}.
        double log_gamma_q_cf(double a, double x)
        {
            constexpr double tiny = 1e-300;
            double b = x + 1.0 - a;
            double c = 1.0 / tiny;
            double d = 1.0 / b;
            double h = d;
            for (int i = 1; i < 10'000'000; ++i)
            {
                double an = -i * (i - a);
                b += 2.0;
                d = an * d + b;
                if (std::fabs(d) < tiny)
                    d = tiny;
                c = b + an / c;
                if (std::fabs(c) < tiny)
                    c = tiny;
                d = 1.0 / d;
                double del = d * c;
                h *= del;
                if (std::fabs(del - 1.0) < 1e-16)
                    return std::log(h);
            }
            throw NoConvergenceError("reg_gamma: continued fraction did not converge");
        }

        // DoubleDouble value of (v + k), exact for integer k.
        DoubleDouble shifted(double v, double k) { return dd_detail::two_sum(v, k); }

        bool is_nonpositive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

        // (1 - z)^p; the integer part of p is applied by exact-base repeated
        // squaring so that integer shifts of p keep extended precision.
        ExtSignLog pow_one_minus(double z, double p)
        {
            const double n = std::floor(p);
            ExtSignLog base(dd_detail::two_sum(1.0, -z), 0);
            if (n < 0.0)
                base = ExtSignLog(1.0) / base;
            ExtSignLog r = ipow(base, static_cast<unsigned long long>(std::fabs(n)));
            if (p != n)
                r *= extend(SignLog::from_log(1, (p - n) * std::log1p(-z)));
            return r;
        }
    }

    double ln_gamma(double x)
    {
        if (!(x > 0.0))
            throw DomainError("ln_gamma: requires x > 0");
        if (std::isinf(x))
            return inf;
        if (x < 0.5)
            return ln_gamma_near_two(x) - std::log(x) - std::log1p(x);
        if (x < 1.5)
            return ln_gamma_near_two(x - 1.0) - std::log1p(x - 1.0);
        if (x <= 2.5)
            return ln_gamma_near_two(x - 2.0);
        if (x < 15.0)
        {
            double y = x, prod = 1.0;
            while (y > 2.5)
            {
                y -= 1.0;
                prod *= y;
            }
            return ln_gamma_near_two(y - 2.0) + std::log(prod);
        }
        return (x - 0.5) * std::log(x) - x + half_ln_2pi + stirling_correction(x);
    }

    double log_gamma_density(double a, double x)
    {
        if (!(a >= 0.0) || !(x >= 0.0))
            throw DomainError("log_gamma_density: requires a >= 0 and x >= 0");
        if (x == 0.0)
            return a == 0.0 ? 0.0 : -inf;
        if (std::isinf(x))
            return -inf;
        if (a < 10.0)
            return a * std::log(x) - x - ln_gamma(a + 1.0);
        double t = (x - a) / a;
        double core = std::fabs(t) <= 0.5 ? a * log1pmx(t) : a * std::log(x / a) + (a - x);
        return core - 0.5 * std::log(a) - half_ln_2pi - stirling_correction(a);
    }

    double log_reg_gamma_p(double a, double x)
    {
        require_gamma_args(a, x, "reg_gamma_p");
        if (x == 0.0)
            return -inf;
        if (std::isinf(x))
            return 0.0;
        if (x < a + 1.0)
            return log_gamma_density(a, x) + log_gamma_p_series(a, x);
        return std::log1p(-std::exp(log_gamma_density(a, x) + std::log(a) + log_gamma_q_cf(a, x)));
    }

    double log_reg_gamma_q(double a, double x)
    {
        require_gamma_args(a, x, "reg_gamma_q");
        if (x == 0.0)
            return 0.0;
        if (std::isinf(x))
            return -inf;
        if (x < a + 1.0)
            return std::log1p(-std::exp(log_gamma_density(a, x) + log_gamma_p_series(a, x)));
        return log_gamma_density(a, x) + std::log(a) + log_gamma_q_cf(a, x);
    }

    double reg_gamma_p(double a, double x)
    {
        require_gamma_args(a, x, "reg_gamma_p");
        if (x < a + 1.0)
            return std::exp(log_reg_gamma_p(a, x));
        return 1.0 - std::exp(log_reg_gamma_q(a, x));
    }

    double reg_gamma_q(double a, double x)
    {
        require_gamma_args(a, x, "reg_gamma_q");
        if (x < a + 1.0)
            return 1.0 - std::exp(log_reg_gamma_p(a, x));
        return std::exp(log_reg_gamma_q(a, x));
    }

    double erfc(double x) { return std::erfc(x); }

    SignLog bessel_i(double nu, double x)
    {
        if (!(x >= 0.0) || !(nu > -1.0))
            throw DomainError("bessel_i: requires x >= 0 and nu > -1");
        if (x == 0.0)
        {
            if (nu == 0.0)
                return SignLog(1.0);
            return nu > 0.0 ? SignLog() : SignLog(inf);
        }
        // I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (x^2/4)^k / (k! (nu+1)_k)
        const DoubleDouble q = dd_detail::two_prod(0.5 * x, 0.5 * x);
        ExtSignLog term(1.0), sum(1.0);
        for (int k = 1; k < 100'000'000; ++k)
        {
            DoubleDouble den = dd_detail::two_prod(static_cast<double>(k), 1.0) * shifted(nu, k);
            term *= ExtSignLog(q / den, 0);
            sum += term;
            if (k > 0.5 * x && compare_abs(term, sum * ExtSignLog(1e-18)) < 0)
                break;
        }
        SignLog pre = SignLog::from_log(1, nu * std::log(0.5 * x) - ln_gamma(nu + 1.0));
        return pre * narrow(sum);
    }

    namespace
    {
        ExtSignLog hyp_pfq_ext(std::span<const double> a, std::span<const double> b, double z, double tol)
        {
        for (double bj : b)
            if (is_nonpositive_integer(bj))
                throw PoleError("hyp_pfq: lower parameter is a nonpositive integer");
        bool terminating = false;
        for (double ai : a)
            terminating = terminating || is_nonpositive_integer(ai);
        if (z == 0.0)
            return ExtSignLog(1.0);
        if (!terminating)
        {
            if (a.size() > b.size() + 1)
                throw DivergenceError("hyp_pfq: series diverges for p > q + 1");
            if (a.size() == b.size() + 1 && std::fabs(z) >= 1.0)
                throw DivergenceError("hyp_pfq: series requires |z| < 1 when p = q + 1");
        }

        ExtSignLog term(1.0), sum(1.0);
        int small_run = 0;
        for (long k = 0; k < 20'000'000; ++k)
        {
            const double kd = static_cast<double>(k);
            DoubleDouble num(z), den(kd + 1.0);
            for (double ai : a)
                num *= shifted(ai, kd);
            for (double bj : b)
                den *= shifted(bj, kd);
            DoubleDouble ratio = num / den;
            term *= ExtSignLog(ratio, 0);
            if (term.is_zero())
                return sum;
            sum += term;
            bool small = compare_abs(term, sum.abs() * ExtSignLog(tol)) < 0;
            small_run = small ? small_run + 1 : 0;
            if (small_run >= 2 && std::fabs(ratio.hi) < 1.0)
                return sum;
        }
        throw NoConvergenceError("hyp_pfq: series did not converge");
    }

        // Gamma(c) Gamma(q - p) / (Gamma(q) Gamma(c - p)) (-z)^{-p} in 160-bit arithmetic: in double
        // precision the large log-gammas and the power would cost about p ln|z| ulps.
        ExtSignLog connection_prefactor(double c, double p, double q, double z)
        {
            if (is_nonpositive_integer(q) || is_nonpositive_integer(c - p))
                return ExtSignLog();
            constexpr mpfr_prec_t prec = 160;
            detail::MpFloat l(prec), t(prec), x(prec);
            int sign = 1;
            auto add_lgamma = [&](double arg, int dir)
            {
                int sg = 1;
                mpfr_set_d(x.get(), arg, MPFR_RNDN);
                mpfr_lgamma(t.get(), &sg, x.get(), MPFR_RNDN);
                if (dir > 0)
                    mpfr_add(l.get(), l.get(), t.get(), MPFR_RNDN);
                else
                    mpfr_sub(l.get(), l.get(), t.get(), MPFR_RNDN);
                sign *= sg;
            };
            add_lgamma(c, 1);
            add_lgamma(q - p, 1);
            add_lgamma(q, -1);
            add_lgamma(c - p, -1);
            mpfr_set_d(x.get(), -z, MPFR_RNDN);
            mpfr_log(t.get(), x.get(), MPFR_RNDN);
            mpfr_mul_d(t.get(), t.get(), p, MPFR_RNDN);
            mpfr_sub(l.get(), l.get(), t.get(), MPFR_RNDN);
            // exp(l) = m 2^e with m in [1/sqrt2, sqrt2]
            mpfr_const_log2(x.get(), MPFR_RNDN);
            mpfr_div(t.get(), l.get(), x.get(), MPFR_RNDN);
            const long e = mpfr_get_si(t.get(), MPFR_RNDN);
            mpfr_mul_si(x.get(), x.get(), e, MPFR_RNDN);
            mpfr_sub(l.get(), l.get(), x.get(), MPFR_RNDN);
            mpfr_exp(l.get(), l.get(), MPFR_RNDN);
            const double hi = mpfr_get_d(l.get(), MPFR_RNDN);
            mpfr_sub_d(l.get(), l.get(), hi, MPFR_RNDN);
            const double lo = mpfr_get_d(l.get(), MPFR_RNDN);
            return ExtSignLog(DoubleDouble(sign * hi, sign * lo), e);
        }

        ExtSignLog hyp_2f1_ext(double a, double b, double c, double z);

        // Connection to 1/z for z < -1 (both halves of DLMF 15.8.2). Empty when b - a is an
        // integer or when the halves cancel, in which case the caller keeps the Pfaff form.
        std::optional<ExtSignLog> hyp_2f1_inverse(double a, double b, double c, double z)
        {
            const double d = b - a;
            if (std::fabs(d - std::round(d)) < 1e-6 || is_nonpositive_integer(a) || is_nonpositive_integer(b))
                return std::nullopt;
            auto half = [&](double p, double q)
            {
                const ExtSignLog pre = connection_prefactor(c, p, q, z);
                return pre.is_zero() ? pre : pre * hyp_2f1_ext(p, p - c + 1.0, p - q + 1.0, 1.0 / z);
            };
            const ExtSignLog t1 = half(a, b), t2 = half(b, a);
            const ExtSignLog sum = t1 + t2;
            if (sum.is_zero() || compare_abs(sum, (t1.abs() + t2.abs()) * ExtSignLog(1e-2)) < 0)
                return std::nullopt;
            return sum;
        }

        ExtSignLog hyp_2f1_ext(double a, double b, double c, double z)
        {
        if (is_nonpositive_integer(c))
            throw PoleError("hyp_2f1: c is a nonpositive integer");
        if (!(z < 1.0))
            throw DivergenceError("hyp_2f1: requires z < 1");
        if (z == 0.0)
            return ExtSignLog(1.0);
        if (z > 0.0)
        {
            const std::array<double, 2> up = {a, b};
            const std::array<double, 1> lo = {c};
            return hyp_pfq_ext(up, lo, z, 1e-32);
        }
        // Pfaff alone would need a slowly converging series near z/(z-1) = 1.
        if (z < -2.0)
            if (auto v = hyp_2f1_inverse(a, b, c, z))
                return *v;
        // Pfaff: 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)), or the a <-> b mirror.
        const double zeta = z / (z - 1.0);
        const bool keep_a = std::fabs(a * (c - b)) <= std::fabs(b * (c - a));
        const double p = keep_a ? a : b;
        const std::array<double, 2> up = {p, keep_a ? c - b : c - a};
        const std::array<double, 1> lo = {c};
        return pow_one_minus(z, -p) * hyp_pfq_ext(up, lo, zeta, 1e-32);
        }
    }

    SignLog hyp_pfq(std::span<const double> a, std::span<const double> b, double z, double tol)
    {
        return narrow(hyp_pfq_ext(a, b, z, tol));
    }

    SignLog hyp_2f1(double a, double b, double c, double z) { return narrow(hyp_2f1_ext(a, b, c, z)); }

    std::vector<SignLog> hyp_2f1_shifted(double a, double b, double c, double z, std::size_t count)
    {
        std::vector<SignLog> out(count);
        if (count == 0)
            return out;
        if (z == 0.0)
        {
            for (auto &v : out)
                v = SignLog(1.0);
            return out;
        }
        auto direct = [&](std::size_t m) {
            double s = static_cast<double>(m);
            return hyp_2f1_ext(a + s, b + s, c + s, z);
        };
        if (count <= 2)
        {
            for (std::size_t m = 0; m < count; ++m)
                out[m] = narrow(direct(m));
            return out;
        }

        // F_m = A_m F_{m+1} + B_m F_{m+2}
        auto coeffs = [&](std::size_t m, ExtSignLog &A, ExtSignLog &B) {
            const double s = static_cast<double>(m);
            DoubleDouble am = shifted(a, s), bm = shifted(b, s), cm = shifted(c, s);
            DoubleDouble cm1 = cm + DoubleDouble(1.0);
            if (cm.hi == 0.0 || cm1.hi == 0.0)
                return false;
            DoubleDouble zz(z);
            DoubleDouble one_m_z = dd_detail::two_sum(1.0, -z);
            A = ExtSignLog((cm - (am + bm + DoubleDouble(1.0)) * zz) / cm, 0);
            B = ExtSignLog(zz * one_m_z * (am + DoubleDouble(1.0)) * (bm + DoubleDouble(1.0)) / (cm * cm1), 0);
            return true;
        };

        // Relative error model: a seed from direct summation carries seed_err; each
        // recurrence step adds rounding and amplifies inherited error by the
        // cancellation ratio of the two contributions.
        constexpr double seed_err = 1e-26;
        constexpr double unit = 1.3e-32;
        constexpr double threshold = 1e-17;
        std::vector<ExtSignLog> y(count);

        if (z < 0.5)
        {
            std::size_t top = count - 1;
            y[top] = direct(top);
            y[top - 1] = direct(top - 1);
            double e2 = seed_err, e1 = seed_err;
            for (std::size_t m = top - 1; m-- > 0;)
            {
                ExtSignLog A, B;
                bool ok = coeffs(m, A, B);
                ExtSignLog t1 = A * y[m + 1], t2 = B * y[m + 2];
                ExtSignLog ym = t1 + t2;
                double e = inf;
                if (ok && !ym.is_zero())
                {
                    double r1 = (t1 / ym).abs().value(), r2 = (t2 / ym).abs().value();
                    e = r1 * e1 + r2 * e2 + unit * (r1 + r2);
                }
                if (!(e < threshold))
                {
                    ym = direct(m);
                    e = seed_err;
                    if (m + 1 < top)
                    {
                        y[m + 1] = direct(m + 1);
                        e1 = seed_err;
                    }
                }
                y[m] = ym;
                e2 = e1;
                e1 = e;
            }
        }
        else
        {
            y[0] = direct(0);
            y[1] = direct(1);
            double e0 = seed_err, e1 = seed_err;
            for (std::size_t m = 0; m + 2 < count; ++m)
            {
                ExtSignLog A, B;
                bool ok = coeffs(m, A, B) && !B.is_zero();
                double e = inf;
                ExtSignLog yn;
                if (ok)
                {
                    ExtSignLog t0 = y[m] / B, t1 = A * y[m + 1] / B;
                    yn = t0 - t1;
                    if (!yn.is_zero())
                    {
                        double r0 = (t0 / yn).abs().value(), r1 = (t1 / yn).abs().value();
                        e = r0 * e0 + r1 * e1 + unit * (r0 + r1);
                    }
                }
                if (!(e < threshold))
                {
                    yn = direct(m + 2);
                    e = seed_err;
                    y[m + 1] = direct(m + 1);
                    e1 = seed_err;
                }
                y[m + 2] = yn;
                e0 = e1;
                e1 = e;
            }
        }
        for (std::size_t m = 0; m < count; ++m)
            out[m] = narrow(y[m]);
        return out;
    }
}
