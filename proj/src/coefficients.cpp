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

#include "kmsum/coefficients.hpp"
#include "kmsum/errors.hpp"
#include "kmsum/special_functions.hpp"

#include "mp_float.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace kmsum
{
    using detail::MpFloat;

    void FadingParams::validate() const
    {
        if (!(kappa >= 0.0) || !std::isfinite(kappa))
            throw DomainError("FadingParams: kappa must be finite and >= 0");
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw DomainError("FadingParams: mu must be finite and > 0");
    }

    SumSpec::SumSpec(FadingParams params, int n_branches, double w_hat) : params_(params), n_(n_branches), w_hat_(w_hat)
    {
        params_.validate();
        if (n_branches < 1)
            throw DomainError("SumSpec: number of branches must be >= 1");
        if (!(w_hat > 0.0) || !std::isfinite(w_hat))
            throw DomainError("SumSpec: w_hat must be finite and > 0");
    }

    namespace
    {
        constexpr double unit_dd = 0x1p-104;
        constexpr double target_rel = 1e-24;
        constexpr double weight_rel = 1e-26;
        constexpr double near_zero_scale = 0x1p-30;

        SignLog mag(const ExtSignLog &x) { return narrow(x).abs(); }

        SignLog mag(const MpFloat &x)
        {
            if (x.is_zero())
                return {};
            long e = 0;
            double d = mpfr_get_d_2exp(&e, x.get(), MPFR_RNDN);
            return SignLog(std::fabs(d), e);
        }

        double ratio(const SignLog &num, const SignLog &den)
        {
            if (num.is_zero())
                return 0.0;
            if (den.is_zero())
                return std::numeric_limits<double>::infinity();
            return (num / den).value();
        }

        long bits_for(double r)
        {
            if (!std::isfinite(r))
                return 256;
            return r > 1.0 ? static_cast<long>(std::ceil(std::log2(r))) : 0;
        }
    }

    struct CoefficientCache::Engine
    {
        CoefficientKind kind;
        double kappa, mu;
        int n;
        DoubleDouble kmu;  // kappa mu
        DoubleDouble kkmu; // kappa K mu

        std::vector<ExtSignLog> vals;
        std::vector<SignLog> err; // absolute error estimates of vals / hp_vals

        std::vector<ExtSignLog> g; // recursion weights without the integer factor
        std::vector<SignLog> g_err;
        ExtSignLog power{1.0};

        long prec = 106;
        int escalations = 0;
        std::vector<MpFloat> hp_vals;
        std::vector<MpFloat> hp_g;
        std::vector<SignLog> hp_g_err;

        Engine(CoefficientKind k, const FadingParams &p, int n_) : kind(k), kappa(p.kappa), mu(p.mu), n(n_)
        {
            kmu = dd_detail::two_prod(kappa, mu);
            kkmu = kmu * dd_detail::two_sum(1.0, kappa) * DoubleDouble(mu);
            vals.emplace_back(1.0);
            err.emplace_back();
            g.emplace_back();
            g_err.emplace_back();
        }

        bool high_precision() const { return prec > 106; }

        // Weight i at double-double precision.
        void push_weight_dd()
        {
            const std::size_t i = g.size();
            const double id = static_cast<double>(i);
            if (kind == CoefficientKind::tilde)
            {
                power *= ExtSignLog(kmu / DoubleDouble(id), 0);
                g.push_back(power);
                g_err.push_back(mag(power) * ((2.0 * id + 1.0) * unit_dd));
                return;
            }
            // Gamma(i+mu) times the inner alternating sum, generated from its l = 0 term.
            power *= ExtSignLog(kkmu / DoubleDouble(id), 0);
            ExtSignLog t = power, s = power;
            SignLog abs_sum = mag(power);
            for (std::size_t l = 0; l < i; ++l)
            {
                const double rem = static_cast<double>(i - l);
                DoubleDouble num = dd_detail::two_prod(rem, 1.0) * dd_detail::two_sum(rem - 1.0, mu);
                DoubleDouble den = kmu * DoubleDouble(static_cast<double>(l + 1));
                t *= ExtSignLog(-(num / den), 0);
                s += t;
                abs_sum += mag(t);
            }
            SignLog e = abs_sum * ((2.0 * id + 8.0) * unit_dd);
            if (!(ratio(e, mag(s)) <= weight_rel))
            {
                MpFloat c = standard_weight_mp(i, 128 + bits_for(ratio(abs_sum, mag(s))));
                s = c.to_ext();
                e = mag(s) * (2.0 * unit_dd);
            }
            g.push_back(s);
            g_err.push_back(e);
        }

        // Standard weight i in MPFR, raising precision until cancellation is covered
        // with `extra` spare bits.
        MpFloat standard_weight_mp(std::size_t i, long extra) const
        {
            long p = std::max<long>(prec, 106) + extra;
            for (;;)
            {
                MpFloat kmu_hp(p, kappa), kkmu_hp(p, 1.0), t(p), s(p), f(p), tmp(p);
                mpfr_mul_d(kmu_hp.get(), kmu_hp.get(), mu, MPFR_RNDN);
                mpfr_add_d(kkmu_hp.get(), kkmu_hp.get(), kappa, MPFR_RNDN);
                mpfr_mul(kkmu_hp.get(), kkmu_hp.get(), kmu_hp.get(), MPFR_RNDN);
                mpfr_mul_d(kkmu_hp.get(), kkmu_hp.get(), mu, MPFR_RNDN);
                mpfr_pow_ui(t.get(), kkmu_hp.get(), i, MPFR_RNDN);
                mpfr_fac_ui(tmp.get(), i, MPFR_RNDN);
                mpfr_div(t.get(), t.get(), tmp.get(), MPFR_RNDN);
                mpfr_set(s.get(), t.get(), MPFR_RNDN);
                SignLog abs_sum = mag(t);
                for (std::size_t l = 0; l < i; ++l)
                {
                    const long rem = static_cast<long>(i - l);
                    mpfr_set_d(f.get(), mu, MPFR_RNDN);
                    mpfr_add_si(f.get(), f.get(), rem - 1, MPFR_RNDN);
                    mpfr_mul_si(f.get(), f.get(), -rem, MPFR_RNDN);
                    mpfr_mul(t.get(), t.get(), f.get(), MPFR_RNDN);
                    mpfr_mul_ui(tmp.get(), kmu_hp.get(), l + 1, MPFR_RNDN);
                    mpfr_div(t.get(), t.get(), tmp.get(), MPFR_RNDN);
                    mpfr_add(s.get(), s.get(), t.get(), MPFR_RNDN);
                    abs_sum += mag(t);
                }
                long needed = std::max<long>(prec, 106) + 64 + bits_for(ratio(abs_sum, mag(s)));
                if (p >= needed)
                    return s;
                p = needed + 16;
            }
        }

        void push_weight_mp()
        {
            const std::size_t i = hp_g.size();
            const double unit = std::ldexp(1.0, static_cast<int>(-prec + 2));
            if (kind == CoefficientKind::tilde)
            {
                MpFloat w(prec, kappa);
                if (i == 0)
                    mpfr_set_ui(w.get(), 0, MPFR_RNDN);
                else
                {
                    mpfr_mul_d(w.get(), w.get(), mu, MPFR_RNDN);
                    mpfr_div_ui(w.get(), w.get(), i, MPFR_RNDN);
                    if (i > 1)
                        mpfr_mul(w.get(), w.get(), hp_g[i - 1].get(), MPFR_RNDN);
                }
                hp_g_err.push_back(mag(w) * ((2.0 * i + 1.0) * unit));
                hp_g.push_back(std::move(w));
                return;
            }
            if (i == 0)
            {
                hp_g.emplace_back(prec);
                hp_g_err.emplace_back();
                lag.reset();
                return;
            }
            // Standard weights are (-K)^i L_i^(mu-1)(kappa mu); the Laguerre recurrence is run at
            // two working precisions and their difference bounds the rounding error.
            for (;;)
            {
                if (!lag || lag->n + 1 != i)
                    lag.emplace(*this, prec + lag_guard);
                lag->advance(*this);
                MpFloat w(prec);
                mpfr_mul(w.get(), lag->kpow.get(), lag->lo_cur.get(), MPFR_RNDN);
                MpFloat d(lag->q_hi);
                mpfr_sub(d.get(), lag->hi_cur.get(), lag->lo_cur.get(), MPFR_RNDN);
                mpfr_mul(d.get(), d.get(), lag->kpow.get(), MPFR_RNDN);
                const SignLog wm = mag(w), dm = mag(d);
                if (ratio(dm, wm) > std::ldexp(1.0, static_cast<int>(-prec)) && lag_guard < 4096)
                {
                    lag_guard *= 2;
                    lag.reset();
                    for (std::size_t k = 1; k < i; ++k)
                    {
                        if (!lag)
                            lag.emplace(*this, prec + lag_guard);
                        lag->advance(*this);
                    }
                    continue;
                }
                hp_g_err.push_back(dm + wm * unit);
                hp_g.push_back(std::move(w));
                return;
            }
        }

        struct Laguerre
        {
            long q_lo, q_hi;
            std::size_t n = 0; // index of the current values
            MpFloat lo_prev, lo_cur, hi_prev, hi_cur, kpow, neg_k, x, alpha;

            Laguerre(const Engine &e, long q)
                : q_lo(q), q_hi(q + 64), lo_prev(q, 0.0), lo_cur(q, 1.0), hi_prev(q + 64, 0.0),
                  hi_cur(q + 64, 1.0), kpow(q + 64, 1.0), neg_k(q + 64, 1.0), x(q + 64, e.kappa),
                  alpha(q + 64, e.mu)
            {
                mpfr_add_d(neg_k.get(), neg_k.get(), e.kappa, MPFR_RNDN);
                mpfr_mul_d(neg_k.get(), neg_k.get(), -e.mu, MPFR_RNDN);
                mpfr_mul_d(x.get(), x.get(), e.mu, MPFR_RNDN);
                mpfr_sub_ui(alpha.get(), alpha.get(), 1, MPFR_RNDN);
            }

            void step(MpFloat &prev, MpFloat &cur, long q)
            {
                // (n+1) L_{n+1} = (2n + 1 + alpha - x) L_n - (n + alpha) L_{n-1}
                MpFloat a(q), b(q);
                mpfr_sub(a.get(), alpha.get(), x.get(), MPFR_RNDN);
                mpfr_add_ui(a.get(), a.get(), 2 * n + 1, MPFR_RNDN);
                mpfr_mul(a.get(), a.get(), cur.get(), MPFR_RNDN);
                mpfr_add_ui(b.get(), alpha.get(), n, MPFR_RNDN);
                mpfr_mul(b.get(), b.get(), prev.get(), MPFR_RNDN);
                mpfr_sub(a.get(), a.get(), b.get(), MPFR_RNDN);
                mpfr_div_ui(a.get(), a.get(), n + 1, MPFR_RNDN);
                std::swap(prev, cur);
                cur = std::move(a);
            }

            void advance(const Engine &)
            {
                step(lo_prev, lo_cur, q_lo);
                step(hi_prev, hi_cur, q_hi);
                mpfr_mul(kpow.get(), kpow.get(), neg_k.get(), MPFR_RNDN);
                ++n;
            }
        };
        std::optional<Laguerre> lag;
        long lag_guard = 64;

        // Scale against which the error of coefficient m is judged.
        SignLog error_scale(const SignLog &value, const SignLog &mean_term) const
        {
            if (kind == CoefficientKind::tilde)
                return value;
            SignLog floor = mean_term * near_zero_scale;
            return compare_abs(value, floor) >= 0 ? value : floor;
        }

        struct Step
        {
            ExtSignLog value;
            SignLog error;
            double excess; // error / (target * scale)
        };

        Step step_dd(std::size_t m)
        {
            while (g.size() <= m)
                push_weight_dd();
            ExtSignLog sum;
            SignLog terms, prop;
            for (std::size_t i = 1; i <= m; ++i)
            {
                const double f = static_cast<double>(n + 1) * static_cast<double>(i) - static_cast<double>(m);
                if (f == 0.0)
                    continue;
                ExtSignLog t = g[i] * vals[m - i] * ExtSignLog(f);
                sum += t;
                terms += mag(t);
                prop += (mag(g[i]) * err[m - i] + g_err[i] * mag(vals[m - i])) * std::fabs(f);
            }
            const double md = static_cast<double>(m);
            Step s;
            s.value = sum / ExtSignLog(md);
            s.error = (prop + terms * (4.0 * unit_dd)) / SignLog(md);
            s.excess = ratio(s.error, error_scale(mag(s.value), terms / SignLog(md))) / target_rel;
            return s;
        }

        Step step_mp(std::size_t m, MpFloat &out)
        {
            while (hp_g.size() <= m)
                push_weight_mp();
            const double unit = std::ldexp(1.0, static_cast<int>(-prec + 2));
            MpFloat t(prec);
            mpfr_set_ui(out.get(), 0, MPFR_RNDN);
            SignLog terms, prop;
            for (std::size_t i = 1; i <= m; ++i)
            {
                const long f = static_cast<long>(n + 1) * static_cast<long>(i) - static_cast<long>(m);
                if (f == 0)
                    continue;
                mpfr_mul(t.get(), hp_g[i].get(), hp_vals[m - i].get(), MPFR_RNDN);
                mpfr_mul_si(t.get(), t.get(), f, MPFR_RNDN);
                mpfr_add(out.get(), out.get(), t.get(), MPFR_RNDN);
                terms += mag(t);
                prop += (mag(hp_g[i]) * err[m - i] + hp_g_err[i] * mag(hp_vals[m - i])) * std::fabs(double(f));
            }
            mpfr_div_ui(out.get(), out.get(), m, MPFR_RNDN);
            const double md = static_cast<double>(m);
            Step s;
            s.value = out.to_ext();
            s.error = (prop + terms * (4.0 * unit)) / SignLog(md);
            s.excess = ratio(s.error, error_scale(mag(out), terms / SignLog(md))) / target_rel;
            return s;
        }

        // Recomputes indices 0 ... upto at precision p; false if p proved too small.
        bool rerun_mp(long p, std::size_t upto, std::atomic<std::uint64_t> &evals, double &excess)
        {
            prec = p;
            hp_vals.clear();
            hp_g.clear();
            hp_g_err.clear();
            err.assign(1, SignLog());
            hp_vals.emplace_back(prec, 1.0);
            for (std::size_t m = 1; m <= upto; ++m)
            {
                MpFloat v(prec);
                Step s = step_mp(m, v);
                evals.fetch_add(m, std::memory_order_relaxed);
                if (s.excess > 1.0)
                {
                    excess = s.excess;
                    return false;
                }
                hp_vals.push_back(std::move(v));
                err.push_back(s.error);
            }
            return true;
        }

        void escalate(std::size_t m, double excess, std::atomic<std::uint64_t> &evals)
        {
            long p = std::max(2 * prec, prec + bits_for(excess) + 64);
            ++escalations;
            while (!rerun_mp(p, m, evals, excess))
                p = std::max(2 * p, p + bits_for(excess) + 64);
        }

        ExtSignLog next(std::size_t m, std::atomic<std::uint64_t> &evals)
        {
            Step s;
            if (!high_precision())
            {
                s = step_dd(m);
                evals.fetch_add(m, std::memory_order_relaxed);
                if (s.excess > 1.0)
                {
                    escalate(m, s.excess, evals);
                    s.value = hp_vals[m].to_ext();
                }
                else
                    err.push_back(s.error);
            }
            else
            {
                MpFloat v(prec);
                s = step_mp(m, v);
                evals.fetch_add(m, std::memory_order_relaxed);
                if (s.excess > 1.0)
                    escalate(m, s.excess, evals);
                else
                {
                    hp_vals.push_back(std::move(v));
                    err.push_back(s.error);
                }
                s.value = hp_vals[m].to_ext();
            }
            vals.push_back(s.value);
            return s.value;
        }

        void drop_last()
        {
            vals.pop_back();
            err.pop_back();
            if (high_precision())
                hp_vals.pop_back();
        }
    };

    CoefficientCache::CoefficientCache(CoefficientKind kind, FadingParams params, int n_branches, std::size_t eps_max,
                                       double log_cap)
        : kind_(kind), params_(params), n_(n_branches), eps_max_(eps_max), log_cap_(log_cap)
    {
        params_.validate();
        if (n_branches < 1)
            throw DomainError("CoefficientCache: number of branches must be >= 1");
        if (kind == CoefficientKind::standard && !(params.kappa > 0.0))
            throw DomainError("CoefficientCache: standard coefficients require kappa > 0");
        chunks_.resize(eps_max_ / chunk_size + 1);
        chunks_[0] = std::make_unique<Chunk>();
        (*chunks_[0])[0] = ExtSignLog(1.0);
        published_.store(1, std::memory_order_release);
        engine_ = std::make_unique<Engine>(kind, params_, n_);
    }

    CoefficientCache::CoefficientCache(CoefficientKind kind, const SumSpec &spec, std::size_t eps_max)
        : CoefficientCache(kind, spec.params(), spec.n_branches(), eps_max)
    {
    }

    CoefficientCache::~CoefficientCache() = default;

    ExtSignLog CoefficientCache::value(std::size_t m)
    {
        if (m >= size())
            ensure(m + 1);
        return (*chunks_[m / chunk_size])[m % chunk_size];
    }

    void CoefficientCache::ensure(std::size_t count)
    {
        if (count <= size())
            return;
        if (count > eps_max_ + 1)
            throw DomainError("CoefficientCache: index " + std::to_string(count - 1) + " exceeds eps_max " +
                              std::to_string(eps_max_));
        std::lock_guard lock(writer_);
        extend_locked(count);
    }

    void CoefficientCache::extend_locked(std::size_t count)
    {
        for (std::size_t m = size(); m < count; ++m)
        {
            ExtSignLog v = engine_->next(m, evals_);
            if (v.log_mag() > log_cap_)
            {
                engine_->drop_last();
                throw OverflowError("CoefficientCache: coefficient " + std::to_string(m) +
                                    " exceeds the magnitude cap");
            }
            auto &chunk = chunks_[m / chunk_size];
            if (!chunk)
                chunk = std::make_unique<Chunk>();
            (*chunk)[m % chunk_size] = v;
            published_.store(m + 1, std::memory_order_release);
        }
    }

    long CoefficientCache::precision_bits() const
    {
        std::lock_guard lock(writer_);
        return engine_->prec;
    }

    int CoefficientCache::escalations() const
    {
        std::lock_guard lock(writer_);
        return engine_->escalations;
    }

    SignLog k_coeff(CoefficientCache &cache, std::size_t m)
    {
        if (cache.kind() != CoefficientKind::standard)
            throw DomainError("k_coeff: cache holds tilde coefficients");
        return cache[m];
    }

    SignLog tilde_k_coeff(CoefficientCache &cache, std::size_t m)
    {
        if (cache.kind() != CoefficientKind::tilde)
            throw DomainError("tilde_k_coeff: cache holds standard coefficients");
        return cache[m];
    }

    namespace
    {
        SignLog naive_weight(CoefficientKind kind, const FadingParams &p, std::size_t i)
        {
            const double kmu = p.kappa * p.mu;
            if (kind == CoefficientKind::tilde)
                return SignLog::from_log(kmu > 0 ? 1 : 0, i * std::log(kmu) - ln_gamma(i + 1.0));
            const double kkmu = kmu * (1.0 + p.kappa) * p.mu;
            SignLog t = SignLog::from_log(1, i * std::log(kkmu) - ln_gamma(i + 1.0));
            SignLog s = t;
            for (std::size_t l = 0; l < i; ++l)
            {
                const double rem = static_cast<double>(i - l);
                t *= SignLog(-rem * (rem - 1.0 + p.mu) / ((l + 1.0) * kmu));
                s += t;
            }
            return s;
        }

        SignLog naive_recurse(CoefficientKind kind, const FadingParams &p, int n, std::size_t m,
                              std::uint64_t &evaluations)
        {
            if (m == 0)
                return SignLog(1.0);
            SignLog sum;
            for (std::size_t i = 1; i <= m; ++i)
            {
                ++evaluations;
                const double f = static_cast<double>(n + 1) * i - static_cast<double>(m);
                sum += naive_weight(kind, p, i) * naive_recurse(kind, p, n, m - i, evaluations) * f;
            }
            return sum / static_cast<double>(m);
        }
    }

    SignLog naive_coefficient(CoefficientKind kind, const FadingParams &params, int n_branches, std::size_t m,
                              std::uint64_t &evaluations)
    {
        params.validate();
        if (kind == CoefficientKind::standard && !(params.kappa > 0.0))
            throw DomainError("naive_coefficient: standard coefficients require kappa > 0");
        return naive_recurse(kind, params, n_branches, m, evaluations);
    }

    SignLog coefficient_magnitude_bound(const FadingParams &params, int n_branches, std::size_t m)
    {
        if (m == 0)
            throw DomainError("coefficient_magnitude_bound: requires m >= 1");
        const double K = (1.0 + params.kappa) * params.mu;
        const double Kt = K * (params.kappa * params.mu + 1.0);
        const double md = static_cast<double>(m);
        return SignLog::from_log(1, std::log(8.0 * n_branches / 7.0) + ln_gamma(params.mu + md) - ln_gamma(md) +
                                        md * std::log(Kt));
    }
}
