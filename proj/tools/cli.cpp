// Copyright 2026 The pema Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pema/averager.hpp"
#include "pema/harness/config.hpp"
#include "pema/harness/csv.hpp"
#include "pema/harness/experiment.hpp"
#include "pema/processes.hpp"
#include "pema/scheme.hpp"

namespace pema::cli {

namespace {

using harness::ConfigError;
using harness::ExperimentConfig;
using harness::ExperimentKind;
using harness::format_real;

/// Options every subcommand accepts.
struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string config;

    void attach(CLI::App* app, const std::string& out_help) {
        app->add_option("--seed", seed, "Base seed; replication i uses seed + i");
        app->add_option("--out", out, out_help);
        app->add_option("--config", config, "Config file (INI sections, see `pema --help`)");
    }
};

std::optional<ExperimentConfig> load_if_given(const Common& common, ExperimentKind fallback) {
    if (common.config.empty()) return std::nullopt;
    return harness::load_config(common.config, fallback);
}

/// Reads whitespace or comma separated numbers.
std::vector<double> read_numbers(std::istream& in) {
    std::vector<double> values;
    std::string token;
    std::uint64_t index = 0;
    char ch = 0;
    auto flush = [&] {
        if (token.empty()) return;
        ++index;
        double v = 0.0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
            throw ConfigError("input", "value " + std::to_string(index) + " is not a number: '" + token + "'");
        values.push_back(v);
        token.clear();
    };
    while (in.get(ch)) {
        if (ch == ',' || std::isspace(static_cast<unsigned char>(ch)))
            flush();
        else
            token += ch;
    }
    flush();
    return values;
}

std::vector<AveragerSpec> parse_averagers(const std::vector<std::string>& items, bool unsafe) {
    std::vector<AveragerSpec> specs;
    for (const auto& item : items) {
        try {
            specs.push_back(AveragerSpec::parse(item, unsafe));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("--averager", e.what());
        }
    }
    return specs;
}

void write_or_print(const harness::CsvTable& table, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << harness::to_csv_text(table);
        return;
    }
    harness::emit_csv(table, out_path);
}

/// Settings shared by the experiment-running subcommands.
struct ExperimentFlags {
    Common common;
    std::optional<std::uint64_t> iters;
    std::optional<std::uint64_t> replications;
    std::vector<std::string> averagers;
    bool unsafe = false;
    bool no_svg = false;

    void attach(CLI::App* app) {
        common.attach(app, "Output directory (default $" + std::string(kOutputDirEnv) + " or ./pema-out)");
        app->add_option("--iters", iters, "Observations or iterations per run");
        app->add_option("--replications", replications, "Number of seeds, starting at --seed");
        app->add_option("--averager", averagers, "Averager such as pema-0.75, ema-0.99, arithmetic (repeatable)");
        app->add_flag("--unsafe", unsafe, "Admit p-EMA exponents outside (0.5, 1]");
        app->add_flag("--no-svg", no_svg, "Skip figure.svg");
    }

    ExperimentConfig resolve(ExperimentKind kind) const {
        ExperimentConfig c = harness::preset(kind);
        if (auto loaded = load_if_given(common, kind)) {
            if (loaded->experiment != kind)
                throw ConfigError("experiment.kind", "config names '" + harness::experiment_id(loaded->experiment) +
                                                         "' but the command runs '" + harness::experiment_id(kind) +
                                                         "'");
            c = *loaded;
        } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
            c.output_dir = env;
        }
        if (!common.out.empty()) c.output_dir = common.out;
        if (iters) c.iters = *iters;
        if (unsafe) {
            c.unsafe_range = true;
            for (auto& a : c.averagers) a.unsafe_range = true;
        }
        if (!averagers.empty()) c.averagers = parse_averagers(averagers, c.unsafe_range);
        if (no_svg) c.svg = false;
        if (common.seed || replications) {
            const std::uint64_t base = common.seed.value_or(c.seeds.front());
            const std::uint64_t count = replications.value_or(c.seeds.size());
            if (count == 0) throw ConfigError("--replications", "must be at least 1");
            c.seeds.clear();
            for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(derive_seed(base, i));
        }
        c.validate();
        return c;
    }
};

void report(const harness::Manifest& m, std::ostream& out) {
    out << "experiment " << m.experiment << ": wrote " << m.files.size() << " files to " << m.output_dir.string()
        << " (config " << m.config_hash << ")\n";
    for (const auto& r : m.runs) {
        out << "  " << r.averager << " seed " << r.seed << ": final " << format_real(r.final_value);
        if (r.events) out << ", events " << format_real(*r.events);
        out << '\n';
    }
    for (const auto& w : m.warnings) out << "  warning: " << w << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Streaming p-EMA averagers, averaging-scheme checks and reproducible experiments", "pema"};
    app.require_subcommand(1);
    app.footer(harness::config_reference() + "\nExit codes: 0 success, 1 configuration error, 2 runtime failure.");

    // average
    Common avg_common;
    std::vector<std::string> avg_list{"pema-0.75"};
    std::string avg_input;
    bool avg_unsafe = false;
    auto* average = app.add_subcommand("average", "Stream numbers from stdin or a file through averagers");
    avg_common.attach(average, "Output CSV file (default stdout)");
    auto* avg_opt = average->add_option("--averager", avg_list, "Averager label (repeatable)")->capture_default_str();
    average->add_option("--input", avg_input, "Input file with numbers (default stdin)");
    average->add_flag("--unsafe", avg_unsafe, "Admit p-EMA exponents outside (0.5, 1]");

    // weights
    ExperimentFlags weights_flags;
    auto* weights = app.add_subcommand("weights", "Write last-observation weights and weight profiles");
    weights_flags.attach(weights);

    // scheme-check
    Common sc_common;
    std::string sc_weights = "pema-0.75";
    std::string sc_psi = "log";
    double sc_eps = 1.0;
    std::uint64_t sc_from = 1000;
    std::uint64_t sc_to = 1000000;
    std::size_t sc_samples = 61;
    bool sc_unsafe = false;
    bool sc_expect = false;
    auto* scheme = app.add_subcommand("scheme-check", "Check b_n <= A_n / psi(A_n) on a window of n");
    sc_common.attach(scheme, "Directory for scheme_check.csv");
    auto* sc_weights_opt =
        scheme->add_option("--weights", sc_weights, "pema-P, ema-GAMMA or arithmetic")->capture_default_str();
    scheme->add_option("--psi", sc_psi, "log (log^{1+eps} x) or power (x^eps)")
        ->check(CLI::IsMember({"log", "power"}))
        ->capture_default_str();
    scheme->add_option("--eps", sc_eps, "psi exponent")->capture_default_str();
    scheme->add_option("--from", sc_from, "First n")->capture_default_str();
    scheme->add_option("--to", sc_to, "Last n")->capture_default_str();
    scheme->add_option("--samples", sc_samples, "Log-spaced diagnostic points")->capture_default_str();
    scheme->add_flag("--unsafe", sc_unsafe, "Admit p outside (0.5, 1]");
    scheme->add_flag("--expect-holds", sc_expect, "Exit 2 unless the inequality holds on the whole window");

    // simulate
    Common sim_common;
    std::string sim_process;
    std::uint64_t sim_count = 10000;
    process::TrendNoise sim_trend;
    double sim_q = 0.9;
    double sim_s = 4.0;
    std::uint64_t sim_prefix = 0;
    auto* simulate = app.add_subcommand("simulate", "Sample an observation process to CSV");
    sim_common.attach(simulate, "Output CSV file (default stdout)");
    simulate->add_option("--process", sim_process, "trend, jump, heavy-tail or rademacher")
        ->required()
        ->check(CLI::IsMember({"trend", "jump", "heavy-tail", "rademacher"}));
    simulate->add_option("--count", sim_count, "Number of observations")->capture_default_str();
    auto* o_q = simulate->add_option("--q", sim_q, "Jump stay probability")->capture_default_str();
    auto* o_s = simulate->add_option("--s", sim_s, "Heavy-tail exponent")->capture_default_str();
    auto* o_prefix = simulate->add_option("--forced-prefix", sim_prefix, "Leading +1 signs")->capture_default_str();
    auto* o_noise =
        simulate->add_option("--noise-std", sim_trend.noise_std, "Trend noise level")->capture_default_str();
    auto* o_lo = simulate->add_option("--grid-lo", sim_trend.grid_lo, "Trend grid start")->capture_default_str();
    auto* o_hi = simulate->add_option("--grid-hi", sim_trend.grid_hi, "Trend grid end")->capture_default_str();
    auto* o_np = simulate->add_option("--n-points", sim_trend.n_points, "Trend grid size")->capture_default_str();
    auto* o_hold =
        simulate->add_option("--hold-prefix", sim_trend.hold_prefix, "Trend delay in steps")->capture_default_str();

    // counterexample
    auto* counter = app.add_subcommand("counterexample", "Non-convergence demonstrations");
    counter->require_subcommand(1);
    ExperimentFlags high_flags;
    auto* high = counter->add_subcommand("high-p", "p > 1: a forced positive prefix is never forgotten");
    high_flags.attach(high);
    ExperimentFlags low_flags;
    auto* low = counter->add_subcommand("low-p", "p < 1/2: heavy-tailed spikes keep pushing the estimate up");
    low_flags.attach(low);

    // sgd-run
    ExperimentFlags sgd_flags;
    std::optional<double> sgd_alpha_factor;
    auto* sgd_run = app.add_subcommand("sgd-run", "Constant-step SGD with suggested step-size traces");
    sgd_flags.attach(sgd_run);
    sgd_run->add_option("--alpha-factor", sgd_alpha_factor, "Step size as a multiple of 1/L_hat");

    // reproduce
    ExperimentFlags rep_flags;
    std::string figure;
    auto* reproduce = app.add_subcommand("reproduce", "Run one of the built-in figure experiments");
    rep_flags.attach(reproduce);
    reproduce->add_option("figure-id", figure,
                          "weights, bad-weights, trend, jump, high-p, low-p, sgd or trend-shift (may come from "
                          "--config instead)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*average) {
            bool unsafe = avg_unsafe;
            std::vector<AveragerSpec> specs;
            if (auto cfg = load_if_given(avg_common, ExperimentKind::Weights)) {
                unsafe = unsafe || cfg->unsafe_range;
                specs = cfg->averagers;
            }
            if (avg_opt->count() > 0 || specs.empty()) specs = parse_averagers(avg_list, unsafe);
            std::vector<double> values;
            if (avg_input.empty()) {
                values = read_numbers(in);
            } else {
                std::ifstream file(avg_input, std::ios::binary);
                if (!file) throw std::runtime_error("cannot read " + avg_input);
                values = read_numbers(file);
            }
            if (values.empty()) throw ConfigError("input", "no observations");
            std::vector<Averager> states;
            for (const auto& s : specs) states.emplace_back(s);
            harness::CsvTable table;
            table.header = {"index", "observation"};
            for (const auto& s : specs) table.header.push_back(s.label());
            for (std::size_t i = 0; i < values.size(); ++i) {
                std::vector<harness::Cell> row{static_cast<double>(i + 1), values[i]};
                for (auto& st : states) {
                    st.update(values[i]);
                    row.push_back(st.estimate());
                }
                table.rows.push_back(std::move(row));
            }
            write_or_print(table, avg_common.out, out);
            return kExitOk;
        }

        if (*weights) {
            report(harness::run_experiment(weights_flags.resolve(weights_flags.unsafe ? ExperimentKind::BadWeights
                                                                                      : ExperimentKind::Weights)),
                   out);
            return kExitOk;
        }

        if (*scheme) {
            std::string label = sc_weights;
            bool unsafe = sc_unsafe;
            if (auto cfg = load_if_given(sc_common, ExperimentKind::Weights)) {
                unsafe = unsafe || cfg->unsafe_range;
                if (sc_weights_opt->count() == 0) label = cfg->averagers.front().label();
            }
            AveragerSpec spec;
            try {
                spec = AveragerSpec::parse(label, unsafe);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("--weights", e.what());
            }
            const auto psi = sc_psi == "log" ? scheme::PsiSpec::log_power(sc_eps) : scheme::PsiSpec::power(sc_eps);
            scheme::WeightSeq seq = spec.kind == AveragerKind::Pema  ? scheme::WeightSeq::pema(spec.p)
                                    : spec.kind == AveragerKind::Ema ? scheme::WeightSeq::ema(spec.gamma)
                                                                     : scheme::WeightSeq::arithmetic();
            scheme::SchemeReport rep;
            try {
                rep = scheme::check_scheme(seq, psi, sc_from, sc_to);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("scheme-check", e.what());
            }
            out << "weights " << rep.weights << ", psi " << rep.psi << ", n in [" << rep.n_start << ", " << rep.n_end
                << "]\n";
            out << "  holds everywhere: " << (rep.holds_everywhere ? "yes" : "no") << '\n';
            if (rep.suffix_start)
                out << "  holds from n = " << *rep.suffix_start << " on\n";
            else
                out << "  fails at n = " << rep.n_end << '\n';
            out << "  weights non-decreasing: " << (rep.non_decreasing ? "yes" : "no") << '\n';
            out << "  min margin " << format_real(rep.min_margin) << ", final margin " << format_real(rep.final_margin)
                << '\n';
            if (rep.skipped) out << "  skipped " << rep.skipped << " n where psi is undefined\n";
            for (const auto& w : rep.warnings) out << "  warning: " << w << '\n';
            if (spec.kind == AveragerKind::Pema && sc_psi == "log") {
                const auto ns = scheme::log_spaced(sc_from, sc_to, sc_samples);
                try {
                    const auto diag = scheme::scheme_diagnostic(spec.p, sc_eps, ns, unsafe);
                    const bool decreasing =
                        std::adjacent_find(diag.begin(), diag.end(), std::less_equal<>()) == diag.end();
                    out << "  diagnostic log(Lambda_n)/n^(p/(1+eps)): " << format_real(diag.front()) << " -> "
                        << format_real(diag.back()) << (decreasing ? " (strictly decreasing)" : " (not monotone)")
                        << '\n';
                } catch (const std::invalid_argument& e) {
                    out << "  diagnostic unavailable: " << e.what() << '\n';
                }
            }
            if (!sc_common.out.empty()) {
                std::filesystem::create_directories(sc_common.out);
                harness::CsvTable table;
                table.header = {"n", "log_b", "log_a", "margin", "holds"};
                for (const auto& s : rep.samples)
                    table.rows.push_back(
                        {static_cast<double>(s.n), s.log_b, s.log_a, s.margin, s.holds ? 1.0 : 0.0});
                harness::emit_csv(table, std::filesystem::path(sc_common.out) / "scheme_check.csv");
            }
            return sc_expect && !rep.holds_everywhere ? kExitRuntime : kExitOk;
        }

        if (*simulate) {
            if (auto cfg = load_if_given(sim_common, ExperimentKind::JumpComparison)) {
                if (o_q->count() == 0) sim_q = cfg->q;
                if (o_s->count() == 0) sim_s = cfg->s;
                if (o_prefix->count() == 0) sim_prefix = cfg->forced_prefix;
                if (o_noise->count() == 0) sim_trend.noise_std = cfg->trend.noise_std;
                if (o_lo->count() == 0) sim_trend.grid_lo = cfg->trend.grid_lo;
                if (o_hi->count() == 0) sim_trend.grid_hi = cfg->trend.grid_hi;
                if (o_np->count() == 0) sim_trend.n_points = cfg->trend.n_points;
                if (o_hold->count() == 0) sim_trend.hold_prefix = cfg->trend.hold_prefix;
            }
            process::ProcessSpec spec;
            spec.seed = sim_common.seed.value_or(1);
            if (sim_process == "trend")
                spec.kind = sim_trend;
            else if (sim_process == "jump")
                spec.kind = process::Jump{sim_q};
            else if (sim_process == "heavy-tail")
                spec.kind = process::HeavyTail{sim_s};
            else
                spec.kind = process::Rademacher{sim_prefix};
            try {
                spec.validate();
                if (sim_process == "trend" && sim_count > sim_trend.n_points + sim_trend.hold_prefix)
                    throw std::invalid_argument("--count exceeds --n-points + --hold-prefix");
            } catch (const std::invalid_argument& e) {
                throw ConfigError("simulate", e.what());
            }
            const auto samples = process::generate(spec, sim_count);
            harness::CsvTable table;
            table.header = spec.has_true_value() ? std::vector<std::string>{"index", "true_value", "observation"}
                                                 : std::vector<std::string>{"index", "observation"};
            for (std::size_t i = 0; i < samples.size(); ++i) {
                std::vector<harness::Cell> row{static_cast<double>(i + 1)};
                if (spec.has_true_value()) row.push_back(samples[i].true_value);
                row.push_back(samples[i].observation);
                table.rows.push_back(std::move(row));
            }
            write_or_print(table, sim_common.out, out);
            return kExitOk;
        }

        if (*high) {
            report(harness::run_experiment(high_flags.resolve(ExperimentKind::CounterexampleHighP)), out);
            return kExitOk;
        }
        if (*low) {
            report(harness::run_experiment(low_flags.resolve(ExperimentKind::CounterexampleLowP)), out);
            return kExitOk;
        }

        if (*sgd_run) {
            auto cfg = sgd_flags.resolve(ExperimentKind::SgdSuggestedSteps);
            if (sgd_alpha_factor) cfg.alpha_factor = *sgd_alpha_factor;
            cfg.validate();
            report(harness::run_experiment(cfg), out);
            return kExitOk;
        }

        if (*reproduce) {
            std::optional<ExperimentKind> kind;
            if (!figure.empty()) kind = harness::parse_experiment_id(figure);
            if (!rep_flags.common.config.empty()) {
                const auto loaded = harness::load_config(rep_flags.common.config, kind.value_or(ExperimentKind::Weights));
                if (!kind) kind = loaded.experiment;
            }
            if (!kind) throw ConfigError("figure-id", "name a figure or pass --config with [experiment] kind");
            report(harness::run_experiment(rep_flags.resolve(*kind)), out);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    err << "error: no command given\n";
    return kExitConfig;
}

}  // namespace pema::cli
