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

#include "pema/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <json.hpp>
#include <stdexcept>
#include <thread>

#include "pema/adaptive.hpp"
#include "pema/harness/csv.hpp"
#include "pema/harness/svg.hpp"
#include "pema/processes.hpp"

namespace pema::harness {

namespace fs = std::filesystem;

namespace {

struct SeedResult {
    std::vector<std::string> files;
    std::vector<RunRecord> runs;
    std::vector<std::string> warnings;
    std::vector<PlotSeries> plot;  // filled for the first seed only
    std::vector<std::pair<std::string, double>> reference_lines;
};

std::vector<double> index_axis(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
    return x;
}

std::string run_file(const ExperimentConfig& c, const AveragerSpec& a, std::uint64_t seed) {
    return experiment_id(c.experiment) + "_" + a.label() + "_seed" + std::to_string(seed) + ".csv";
}

std::vector<double> observations_for(const ExperimentConfig& c, std::uint64_t seed,
                                     std::vector<std::optional<double>>& truth) {
    switch (c.experiment) {
        case ExperimentKind::TrendComparison:
        case ExperimentKind::TrendShift: {
            const auto samples = process::gen_trend_noise(c.trend, c.iters, seed);
            std::vector<double> obs;
            obs.reserve(samples.size());
            truth.clear();
            for (const auto& s : samples) {
                obs.push_back(s.observation);
                truth.push_back(s.true_value);
            }
            return obs;
        }
        case ExperimentKind::JumpComparison:
            return process::gen_jump(c.q, c.iters, seed);
        case ExperimentKind::CounterexampleHighP:
            if (c.worst_case) {
                std::vector<double> obs(c.iters, -1.0);
                std::fill_n(obs.begin(), std::min<std::uint64_t>(c.forced_prefix, c.iters), 1.0);
                return obs;
            }
            return process::gen_rademacher(c.iters, seed, c.forced_prefix);
        case ExperimentKind::CounterexampleLowP:
            return process::gen_heavy_tail(c.s, c.iters, seed);
        default:
            throw std::logic_error("observations_for: not a stream experiment");
    }
}

SeedResult run_stream_seed(const ExperimentConfig& c, std::uint64_t seed, bool keep_plot) {
    SeedResult out;
    std::vector<std::optional<double>> truth;
    const auto obs = observations_for(c, seed, truth);
    const bool low_p = c.experiment == ExperimentKind::CounterexampleLowP;

    if (keep_plot && !truth.empty()) {
        PlotSeries t{"true value", index_axis(obs.size()), {}, true};
        for (const auto& v : truth) t.y.push_back(v.value_or(NAN));
        out.plot.push_back(std::move(t));
    }

    for (const auto& spec : c.averagers) {
        CsvTable table;
        table.header = {"index"};
        if (!truth.empty()) table.header.push_back("true_value");
        table.header.insert(table.header.end(), {"observation", "estimate"});
        if (low_p) table.header.insert(table.header.end(), {"threshold", "excursion"});
        table.rows.reserve(obs.size());

        Averager avg(spec);
        std::vector<double> est_series;
        double events = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const double threshold = 3.0 - avg.newest_weight(avg.count());
            avg.update(obs[i]);
            std::vector<Cell> row{static_cast<double>(i + 1)};
            if (!truth.empty()) row.push_back(truth[i]);
            row.push_back(obs[i]);
            row.push_back(avg.estimate());
            if (low_p) {
                const bool hit = avg.estimate() >= threshold;
                events += hit ? 1.0 : 0.0;
                row.push_back(threshold);
                row.push_back(hit ? 1.0 : 0.0);
            }
            table.rows.push_back(std::move(row));
            if (keep_plot) est_series.push_back(avg.estimate());
        }
        const auto name = run_file(c, spec, seed);
        emit_csv(table, c.output_dir / name);
        out.files.push_back(name);
        RunRecord rec{seed, spec.label(), name, avg.estimate(), std::nullopt};
        if (low_p) rec.events = events;
        out.runs.push_back(std::move(rec));
        if (keep_plot) out.plot.push_back({spec.label(), index_axis(est_series.size()), std::move(est_series), false});
    }
    if (c.experiment == ExperimentKind::CounterexampleHighP) out.reference_lines.emplace_back("1/2", 0.5);
    if (low_p) out.reference_lines.emplace_back("3", 3.0);
    return out;
}

struct SgdSetup {
    sgd::QuadraticSop sop;
    double L_hat;
    double alpha;
};

SgdSetup sgd_setup(const ExperimentConfig& c) {
    auto sop = sgd::build_sop(c.problem.dim,
                              sgd::log_spaced_eigenvalues(c.problem.dim, c.problem.lambda_lo, c.problem.lambda_hi),
                              c.problem.sigma_a, c.problem.sigma_b, c.sop_seed, c.linear_noise);
    const double L_hat = sgd::smoothness_estimate(sop, c.l_samples, derive_seed(c.sop_seed, 1));
    return {std::move(sop), L_hat, c.alpha_factor / L_hat};
}

SeedResult run_sgd_seed(const ExperimentConfig& c, const SgdSetup& setup, std::uint64_t seed, bool keep_plot) {
    SeedResult out;
    for (const auto& spec : c.averagers) {
        const auto trace = sgd::run_adaptive_trace(setup.sop, setup.alpha, c.iters, spec, std::nullopt, seed,
                                                   setup.L_hat, sgd::TraceOptions{false});
        CsvTable table;
        table.header = {"k", "g_tilde", "sigma_tilde", "g_hat", "sigma_hat", "zeta_raw", "zeta_clamped",
                        "alpha_suggested"};
        table.rows.reserve(trace.records.size());
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& r : trace.records) {
            table.rows.push_back({static_cast<double>(r.k), r.g_tilde, r.sigma_tilde, r.g_hat, r.sigma_hat,
                                  r.zeta_raw, r.zeta, r.alpha_suggested});
            if (keep_plot && r.alpha_suggested) {
                xs.push_back(static_cast<double>(r.k));
                ys.push_back(*r.alpha_suggested);
            }
        }
        const auto name = run_file(c, spec, seed);
        emit_csv(table, c.output_dir / name);
        out.files.push_back(name);
        const auto& last = trace.records.back();
        out.runs.push_back({seed, spec.label(), name, last.alpha_suggested.value_or(NAN), std::nullopt});
        for (const auto& w : trace.warnings) out.warnings.push_back(spec.label() + " seed " + std::to_string(seed) + ": " + w);
        if (keep_plot) out.plot.push_back({spec.label(), std::move(xs), std::move(ys), false});
    }
    out.reference_lines.emplace_back("alpha/2", setup.alpha / 2.0);
    return out;
}

SeedResult run_weights(const ExperimentConfig& c) {
    SeedResult out;
    CsvTable combined;
    combined.header = {"n"};
    for (const auto& spec : c.averagers) combined.header.push_back(spec.label());
    combined.rows.assign(c.iters, {});
    for (std::uint64_t n = 1; n <= c.iters; ++n) combined.rows[n - 1].push_back(static_cast<double>(n));

    for (const auto& spec : c.averagers) {
        CsvTable table;
        table.header = {"n", "last_weight"};
        std::vector<double> ys;
        for (std::uint64_t n = 1; n <= c.iters; ++n) {
            const double w = last_weight(spec, n);
            table.rows.push_back({static_cast<double>(n), w});
            combined.rows[n - 1].push_back(w);
            ys.push_back(w);
        }
        const auto name = "weights_" + spec.label() + ".csv";
        emit_csv(table, c.output_dir / name);
        out.files.push_back(name);

        const auto profile = weight_profile(spec, c.iters);
        CsvTable prof;
        prof.header = {"k", "weight"};
        for (std::size_t k = 0; k < profile.weights.size(); ++k)
            prof.rows.push_back({static_cast<double>(k + 1), profile.weights[k]});
        const auto prof_name = "profile_" + spec.label() + ".csv";
        emit_csv(prof, c.output_dir / prof_name);
        out.files.push_back(prof_name);

        out.runs.push_back({0, spec.label(), name, ys.back(), std::nullopt});
        out.plot.push_back({spec.label(), index_axis(ys.size()), std::move(ys), false});
    }
    emit_csv(combined, c.output_dir / "last_weight.csv");
    out.files.push_back("last_weight.csv");
    return out;
}

ChartOptions chart_for(const ExperimentConfig& c) {
    ChartOptions o;
    switch (c.experiment) {
        case ExperimentKind::Weights:
        case ExperimentKind::BadWeights:
            o.title = "Weight of the newest observation";
            o.y_label = "weight";
            o.log_x = true;
            o.log_y = true;
            break;
        case ExperimentKind::TrendComparison:
        case ExperimentKind::TrendShift:
            o.title = "Estimates of a noisy trend";
            o.y_label = "estimate";
            break;
        case ExperimentKind::JumpComparison:
            o.title = "Estimates on a jump process";
            o.y_label = "estimate";
            o.log_x = true;
            break;
        case ExperimentKind::CounterexampleHighP:
            o.title = "Estimate with a forced positive prefix";
            o.y_label = "estimate";
            o.log_x = true;
            break;
        case ExperimentKind::CounterexampleLowP:
            o.title = "Estimate on heavy-tailed data";
            o.y_label = "estimate";
            o.log_x = true;
            break;
        case ExperimentKind::SgdSuggestedSteps:
            o.title = "Suggested step size";
            o.x_label = "k";
            o.y_label = "alpha suggested";
            o.log_x = true;
            o.y_min = 0.0;
            break;
    }
    return o;
}

void prepare_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    if (!fs::is_directory(dir)) throw std::runtime_error("output path " + dir.string() + " is not a directory");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string Manifest::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["config_hash"] = config_hash;
    j["config"] = config_text;
    j["output_dir"] = output_dir.string();
    j["seeds"] = seeds;
    j["files"] = files;
    auto runs_json = nlohmann::ordered_json::array();
    for (const auto& r : runs) {
        nlohmann::ordered_json o;
        o["seed"] = r.seed;
        o["averager"] = r.averager;
        o["file"] = r.file;
        if (std::isfinite(r.final_value))
            o["final_value"] = r.final_value;
        else
            o["final_value"] = nullptr;
        if (r.events) o["events"] = *r.events;
        runs_json.push_back(std::move(o));
    }
    j["runs"] = std::move(runs_json);
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

Manifest run_experiment(const ExperimentConfig& config) {
    config.validate();
    prepare_output_dir(config.output_dir);

    Manifest m;
    m.experiment = experiment_id(config.experiment);
    m.config_text = to_ini(config);
    m.config_hash = config_hash(config);
    m.output_dir = config.output_dir;
    m.seeds = config.seeds;

    write_text(config.output_dir / "config.ini", m.config_text);
    m.files.push_back("config.ini");

    std::vector<SeedResult> results;
    if (config.experiment == ExperimentKind::Weights || config.experiment == ExperimentKind::BadWeights) {
        results.push_back(run_weights(config));
    } else {
        std::optional<SgdSetup> setup;
        if (config.experiment == ExperimentKind::SgdSuggestedSteps) setup = sgd_setup(config);
        const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
        for (std::size_t start = 0; start < config.seeds.size(); start += batch) {
            std::vector<std::future<SeedResult>> futures;
            const std::size_t end = std::min(config.seeds.size(), start + batch);
            for (std::size_t i = start; i < end; ++i) {
                const std::uint64_t seed = config.seeds[i];
                const bool keep_plot = i == 0 && config.svg;
                futures.push_back(std::async(std::launch::async, [&config, &setup, seed, keep_plot] {
                    return setup ? run_sgd_seed(config, *setup, seed, keep_plot)
                                 : run_stream_seed(config, seed, keep_plot);
                }));
            }
            for (auto& f : futures) results.push_back(f.get());
        }
    }

    for (auto& r : results) {
        m.files.insert(m.files.end(), r.files.begin(), r.files.end());
        m.runs.insert(m.runs.end(), r.runs.begin(), r.runs.end());
        m.warnings.insert(m.warnings.end(), r.warnings.begin(), r.warnings.end());
    }

    if (config.svg && !results.empty() && !results.front().plot.empty()) {
        auto options = chart_for(config);
        options.reference_lines = results.front().reference_lines;
        emit_svg(results.front().plot, options, config.output_dir / "figure.svg");
        m.files.push_back("figure.svg");
    }

    write_text(config.output_dir / "manifest.json", m.to_json());
    return m;
}

}  // namespace pema::harness
