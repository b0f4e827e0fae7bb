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

#include "cli.hpp"
#include "validate.hpp"

#include "kmsum/distribution.hpp"
#include "kmsum/errors.hpp"
#include "kmsum/link_budget.hpp"
#include "kmsum/metrics.hpp"

#include <algorithm>
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace kmsum::cli
{
    namespace
    {
        using nlohmann::json;

        // Flat JSON object {"flag-name": value, ...} as a CLI11 configuration source. Flags given
        // on the command line take precedence over the file.
        class JsonConfig : public CLI::Config
        {
        public:
            std::string to_config(const CLI::App *, bool, bool, std::string) const override { return "{}"; }

            std::vector<CLI::ConfigItem> from_config(std::istream &input) const override
            {
                json j;
                try
                {
                    j = json::parse(input);
                }
                catch (const json::exception &e)
                {
                    throw CLI::ConversionError(std::string("config: ") + e.what());
                }
                if (!j.is_object())
                    throw CLI::ConversionError("config: top level must be an object");
                std::vector<CLI::ConfigItem> items;
                for (const auto &[key, value] : j.items())
                {
                    CLI::ConfigItem item;
                    item.name = key;
                    auto text = [](const json &v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
                    if (value.is_array())
                        for (const auto &v : value)
                            item.inputs.push_back(text(v));
                    else if (value.is_boolean())
                        item.inputs.push_back(value.get<bool>() ? "true" : "false");
                    else
                        item.inputs.push_back(text(value));
                    items.push_back(std::move(item));
                }
                return items;
            }
        };

        struct Options
        {
            std::string command;
            double kappa = 1.5;
            double mu = 0.5;
            int n = 64;
            std::optional<double> w_hat;
            LinkBudget budget;
            double gamma_th_db = 0.0;
            std::string mod = "bpsk";
            double tol = 1e-12;
            std::size_t eps_max = CoefficientCache::default_eps_max;
            std::string repr = "auto";
            std::uint64_t seed = 42;
            std::string format = "csv";
            std::string out;
            std::string axis;
            std::optional<double> from, to;
            std::size_t points = 200;
            bool log_axis = false;
            std::optional<double> at;
            bool asymptote = false;
            unsigned threads = 0;
            std::vector<std::string> suites;
            std::size_t trials = 100000;
        };

        const std::map<std::string, ModulationKind> modulation_flags{
            {"bpsk", ModulationKind::bpsk},
            {"bfsk-orth", ModulationKind::bfsk_orthogonal},
            {"bfsk-mincorr", ModulationKind::bfsk_min_correlation}};

        const std::map<std::string, Representation> repr_flags{
            {"auto", Representation::automatic}, {"standard", Representation::standard}, {"tilde", Representation::tilde}};

        std::string_view to_string(Representation r)
        {
            switch (r)
            {
            case Representation::standard:
                return "standard";
            case Representation::tilde:
                return "tilde";
            default:
                return "auto";
            }
        }

        struct Row
        {
            double x = 0.0;
            double value = std::nan("");
            std::size_t terms = 0;
            double error_bound = std::nan("");
            std::string method;
            std::string status = "ok";
            double asymptote = std::nan("");
        };

        SumSpec make_spec(const Options &o)
        {
            const FadingParams p{o.kappa, o.mu};
            if (o.w_hat)
                return SumSpec(p, o.n, *o.w_hat);
            return effective_spec(o.budget, p, o.n).spec;
        }

        TruncationPolicy make_policy(const Options &o)
        {
            TruncationPolicy p;
            p.target_tol = o.tol;
            p.eps_max = o.eps_max;
            p.eps_start = std::min(p.eps_start, o.eps_max);
            p.validate();
            return p;
        }

        void apply_axis(Options &o, double x)
        {
            if (o.axis == "w")
            {
                if (o.command == "pdf" || o.command == "cdf")
                    o.at = x;
                else
                    o.w_hat = x;
            }
            else if (o.axis == "distance")
                o.budget.distance_m = x;
            else if (o.axis == "pt_dbm")
                o.budget.pt_dbm = x;
            else if (o.axis == "fc_hz")
                o.budget.fc_hz = x;
            else if (o.axis == "n")
                o.n = static_cast<int>(std::lround(x));
        }

        Row evaluate(const Options &base, double x)
        {
            Options o = base;
            apply_axis(o, x);
            Row row;
            row.x = x;
            try
            {
                const SumSpec spec = make_spec(o);
                const TruncationPolicy policy = make_policy(o);
                EvalResult r;
                if (o.command == "pdf" || o.command == "cdf")
                {
                    const double w = o.at.value_or(spec.mean());
                    const Representation repr = repr_flags.at(o.repr);
                    r = o.command == "pdf" ? pdf(spec, w, policy, repr) : cdf(spec, w, policy, repr);
                    row.method = to_string(r.representation);
                }
                else if (o.command == "coverage")
                {
                    const SnrThreshold th = SnrThreshold::from_db(o.gamma_th_db);
                    r = coverage(spec, th, policy);
                    row.method = to_string(r.representation);
                    if (o.asymptote)
                        row.asymptote = coverage_asymptotic(spec, th);
                }
                else
                {
                    const Modulation mod = Modulation::of(modulation_flags.at(o.mod));
                    r = bep(spec, mod, policy);
                    row.method = to_string(approach_of(r));
                    if (o.asymptote)
                        row.asymptote = bep_asymptotic(spec, mod);
                }
                row.value = r.value;
                row.terms = r.terms_used;
                row.error_bound = r.error_bound;
            }
            catch (const NoConvergenceError &)
            {
                row.status = "no_convergence";
            }
            catch (const OverflowError &)
            {
                row.status = "overflow";
            }
            catch (const DomainError &)
            {
                row.status = "domain_error";
            }
            catch (const Error &)
            {
                row.status = "error";
            }
            return row;
        }

        std::vector<double> axis_grid(const Options &o)
        {
            std::vector<double> x(o.points);
            for (std::size_t i = 0; i < o.points; ++i)
            {
                const double f = static_cast<double>(i) / static_cast<double>(o.points - 1);
                x[i] = o.log_axis ? *o.from * std::pow(*o.to / *o.from, f) : *o.from + (*o.to - *o.from) * f;
            }
            x.back() = *o.to;
            return x;
        }

        // Fills caches on the first point, then spreads the rest over a worker pool. Rows stay
        // in axis order.
        std::vector<Row> sweep(const Options &o)
        {
            const std::vector<double> x = axis_grid(o);
            std::vector<Row> rows(x.size());
            rows[0] = evaluate(o, x[0]);
            unsigned threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
            std::atomic<std::size_t> next{1};
            auto worker = [&]
            {
                for (std::size_t i = next++; i < x.size(); i = next++)
                    rows[i] = evaluate(o, x[i]);
            };
            if (threads <= 1)
                worker();
            else
            {
                std::vector<std::jthread> pool;
                for (unsigned t = 0; t < threads; ++t)
                    pool.emplace_back(worker);
            }
            return rows;
        }

        std::string number(double v)
        {
            if (std::isnan(v))
                return "";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        std::string axis_column(const Options &o)
        {
            if (o.axis == "distance")
                return "distance_m";
            return o.axis;
        }

        void write_table(const Options &o, const std::vector<Row> &rows, std::ostream &out)
        {
            const std::string value_col = o.command == "bep" ? "bep" : o.command;
            const std::string method_col = o.command == "bep" ? "approach" : "representation";
            if (o.format == "json")
            {
                for (const Row &r : rows)
                {
                    nlohmann::ordered_json j;
                    j[axis_column(o)] = r.x;
                    auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v); };
                    j[value_col] = num(r.value);
                    j["terms_used"] = r.terms;
                    j["error_bound"] = num(r.error_bound);
                    j[method_col] = r.method;
                    if (o.asymptote)
                        j["asymptote"] = num(r.asymptote);
                    j["status"] = r.status;
                    out << j.dump() << '\n';
                }
                return;
            }
            out << axis_column(o) << ',' << value_col << ",terms_used,error_bound," << method_col;
            if (o.asymptote)
                out << ",asymptote";
            out << ",status\n";
            for (const Row &r : rows)
            {
                out << number(r.x) << ',' << number(r.value) << ',' << r.terms << ',' << number(r.error_bound) << ','
                    << r.method;
                if (o.asymptote)
                    out << ',' << number(r.asymptote);
                out << ',' << r.status << '\n';
            }
        }

        void default_axis(Options &o)
        {
            if (o.axis.empty())
                o.axis = o.command == "coverage" ? "distance" : o.command == "bep" ? "pt_dbm" : "w";
            if (o.from && o.to)
                return;
            double lo = 0.0, hi = 1.0;
            if (o.axis == "w")
            {
                if (o.command == "pdf" || o.command == "cdf")
                {
                    const double m = make_spec(o).mean();
                    lo = 0.01 * m, hi = 5.0 * m;
                }
                else
                    lo = 0.01, hi = 100.0;
            }
            else if (o.axis == "distance")
                lo = 10.0, hi = 1000.0;
            else if (o.axis == "pt_dbm")
                lo = 0.0, hi = 40.0;
            else if (o.axis == "fc_hz")
                lo = 100e9, hi = 300e9;
            else if (o.axis == "n")
                lo = 1.0, hi = 512.0;
            if (!o.from)
                o.from = lo;
            if (!o.to)
                o.to = hi;
        }

        int run_sweep(Options &o, std::ostream &out, std::ostream &err)
        {
            try
            {
                default_axis(o);
                if (!(*o.from < *o.to) || o.points < 2)
                    throw DomainError("axis needs --from < --to and --points >= 2");
                if (o.log_axis && !(*o.from > 0.0))
                    throw DomainError("--log-axis needs --from > 0");
                Options probe = o;
                apply_axis(probe, *o.from);
                (void)make_spec(probe);
                (void)make_policy(o);
            }
            catch (const Error &e)
            {
                err << "error: " << e.what() << '\n';
                return exit_usage;
            }
            const std::vector<Row> rows = sweep(o);
            if (o.out.empty())
                write_table(o, rows, out);
            else
            {
                std::ofstream file(o.out, std::ios::binary);
                if (!file)
                {
                    err << "error: cannot open " << o.out << '\n';
                    return exit_usage;
                }
                write_table(o, rows, file);
            }
            int code = exit_ok;
            for (const Row &r : rows)
                if (r.status != "ok")
                {
                    err << "warning: " << r.status << " at " << axis_column(o) << " = " << number(r.x) << '\n';
                    code = exit_no_convergence;
                }
            return code;
        }

        int run_validate(const Options &o, std::ostream &out, std::ostream &err)
        {
            if (o.suites.empty())
            {
                err << "error: validate needs at least one --suite\n";
                return exit_usage;
            }
            std::vector<std::string> suites;
            for (const std::string &s : o.suites)
                if (s == "all")
                    suites.insert(suites.end(), suite_names().begin(), suite_names().end());
                else
                    suites.push_back(s);
            bool all_pass = true;
            std::ostringstream buffer;
            for (const std::string &s : suites)
            {
                const SuiteReport report = run_suite(s, o.seed, o.trials, o.threads);
                nlohmann::ordered_json line;
                line["suite"] = report.suite;
                line["checks"] = nlohmann::ordered_json::array();
                for (const Check &c : report.checks)
                {
                    nlohmann::ordered_json check;
                    check["name"] = c.name;
                    check["pass"] = c.pass;
                    check["measured"] = c.measured;
                    check["bound"] = c.bound;
                    line["checks"].push_back(std::move(check));
                }
                buffer << line.dump() << '\n';
                all_pass = all_pass && report.passed();
            }
            if (o.out.empty())
                out << buffer.str();
            else
                std::ofstream(o.out, std::ios::binary) << buffer.str();
            return all_pass ? exit_ok : exit_validation_failed;
        }
    }

    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        Options o;
        CLI::App app{"Exact series evaluation for sums of squared kappa-mu variates", "kmsum"};
        app.config_formatter(std::make_shared<JsonConfig>());
        app.set_config("--config", "", "JSON file of flag values; command-line flags take precedence");

        std::vector<std::string> suites = suite_names();
        suites.push_back("all");
        app.add_option("command", o.command, "pdf | cdf | coverage | bep | validate")
            ->required()
            ->check(CLI::IsMember({"pdf", "cdf", "coverage", "bep", "validate"}));

        app.add_option("--kappa", o.kappa, "Dominant-to-scattered power ratio")->capture_default_str();
        app.add_option("--mu", o.mu, "Number of multipath clusters")->capture_default_str();
        app.add_option("--n", o.n, "Number of branches")->capture_default_str();
        app.add_option("--w-hat", o.w_hat, "Per-branch mean SNR (linear); overrides the link budget");
        app.add_option("--pt-dbm", o.budget.pt_dbm, "Transmit power [dBm]")->capture_default_str();
        app.add_option_function<double>("--fc-ghz", [&](double g) { o.budget.fc_hz = g * 1e9; }, "Carrier frequency [GHz] (default 140)");
        app.add_option("--distance-m", o.budget.distance_m, "Distance [m]")->capture_default_str();
        app.add_option("--beta", o.budget.path_loss_exp, "Path-loss exponent")->capture_default_str();
        app.add_option("--noise-figure-db", o.budget.noise_figure_db, "Noise figure [dB]")->capture_default_str();
        app.add_option("--bw-frac", o.budget.bandwidth_fraction, "Bandwidth as a fraction of f_c")->capture_default_str();
        app.add_option("--alpha", o.budget.alpha, "CSI estimation error weight in [0, 1)")->capture_default_str();
        app.add_option("--gamma-th-db", o.gamma_th_db, "SNR threshold [dB]")->capture_default_str();
        app.add_option("--mod", o.mod, "Modulation")->check(CLI::IsMember({"bpsk", "bfsk-orth", "bfsk-mincorr"}))->capture_default_str();
        app.add_option("--tol", o.tol, "Absolute truncation target")->capture_default_str();
        app.add_option("--eps-max", o.eps_max, "Largest number of series terms")->capture_default_str();
        app.add_option("--repr", o.repr, "Series representation for pdf and cdf")
            ->check(CLI::IsMember({"auto", "standard", "tilde"}))
            ->capture_default_str();
        app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
        app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        app.add_option("--out", o.out, "Output file (default stdout)");
        app.add_option("--axis", o.axis, "Sweep axis")->check(CLI::IsMember({"w", "distance", "pt_dbm", "fc_hz", "n"}));
        app.add_option("--from", o.from, "First axis value");
        app.add_option("--to", o.to, "Last axis value");
        app.add_option("--points", o.points, "Number of axis points")->capture_default_str();
        app.add_flag("--log-axis", o.log_axis, "Geometric axis spacing");
        app.add_option("--at", o.at, "Evaluation point of pdf or cdf when the axis is not w (default N w_hat)");
        app.add_flag("--asymptote", o.asymptote, "Add the high-SNR asymptote column");
        app.add_option("--threads", o.threads, "Worker threads, 0 = all cores")->capture_default_str();
        app.add_option("--suite", o.suites, "Validation suite (repeatable)")->check(CLI::IsMember(suites));
        app.add_option("--trials", o.trials, "Monte Carlo trials for the mc suite")->capture_default_str();

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return exit_ok;
        }
        catch (const CLI::ParseError &e)
        {
            err << "error: " << e.what() << '\n';
            return exit_usage;
        }

        if (o.command == "validate")
            return run_validate(o, out, err);
        return run_sweep(o, out, err);
    }
}
