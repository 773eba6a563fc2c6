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

// Acceptance checks. Each check prints one line:
//   [PASS] NN name: details
//   [FAIL] NN name: details
// Usage: acceptance [--only N]...

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pema/adaptive.hpp"
#include "pema/averager.hpp"
#include "pema/harness/config.hpp"
#include "pema/harness/experiment.hpp"
#include "pema/processes.hpp"
#include "pema/rng.hpp"
#include "pema/scheme.hpp"
#include "pema/sop.hpp"

namespace {

using pema::Averager;
using pema::AveragerSpec;
namespace sc = pema::scheme;
namespace pr = pema::process;
namespace sg = pema::sgd;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double std_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
}

Outcome p_one_equivalence() {
    pema::Rng rng(1);
    Averager p1(AveragerSpec::pema(1.0));
    Averager mean(AveragerSpec::arithmetic());
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = rng.uniform01();
        p1.update(x);
        mean.update(x);
        const double a = p1.estimate();
        const double b = mean.estimate();
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
    }
    return {worst <= 1e-12, fmt("max relative difference %.3g over 1e5 draws (tol 1e-12)", worst)};
}

Outcome last_weight_law() {
    double worst = 0.0;
    for (double p : {0.55, 0.75, 0.95}) {
        sc::BetaSequence seq(p);
        for (std::uint64_t n = 1; n <= 100000; ++n) {
            seq.advance();
            worst = std::max(worst, std::abs(seq.log_beta() - seq.log_lambda() + p * std::log(double(n))));
        }
    }
    return {worst <= 1e-10, fmt("max |log beta_n - log Lambda_n + p log n| = %.3g, n <= 1e5 (tol 1e-10)", worst)};
}

Outcome weight_monotonicity() {
    std::uint64_t violations = 0;
    double min_step = INFINITY;
    for (double p : {0.55, 0.75, 0.95}) {
        sc::BetaSequence seq(p);
        seq.advance();
        for (std::uint64_t k = 1; k <= 100000; ++k) {
            const double prev = seq.log_beta();
            seq.advance();
            const double step = seq.log_beta() - prev;
            min_step = std::min(min_step, step);
            if (!(step > 0.0)) ++violations;
        }
    }
    return {violations == 0, fmt("%llu violations of beta_{k+1} > beta_k for k <= 1e5; smallest log step %.3g",
                                 static_cast<unsigned long long>(violations), min_step)};
}

Outcome profile_agreement() {
    const std::uint64_t n = 2000;
    double worst = 0.0;
    for (const auto& spec : {AveragerSpec::arithmetic(), AveragerSpec::ema(0.9), AveragerSpec::pema(0.75)}) {
        const auto prof = pema::weight_profile(spec, n);
        for (std::uint64_t k = 1; k <= n; ++k) {
            Averager avg(spec);
            for (std::uint64_t i = 1; i <= n; ++i) avg.update(i == k ? 1.0 : 0.0);
            worst = std::max(worst, std::abs(avg.estimate() - prof.weights[k - 1]));
        }
    }
    return {worst <= 1e-10, fmt("max |one-hot recursion - profile| = %.3g at n = 2000, three kinds (tol 1e-10)", worst)};
}

Outcome scheme_condition() {
    const auto rep = sc::check_scheme(sc::WeightSeq::pema(0.75), sc::PsiSpec::log_power(1.0), 1000, 1000000, 61);
    std::size_t failed_samples = 0;
    for (const auto& s : rep.samples) failed_samples += !s.holds;
    const auto ns = sc::log_spaced(1000, 1000000, 61);
    const auto d = sc::scheme_diagnostic(0.75, 1.0, ns);
    bool decreasing = true;
    for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i] < d[i - 1];
    const bool halved = d.back() < 0.5 * d.front();
    const bool pass = rep.holds_everywhere && failed_samples == 0 && decreasing && halved;
    std::string detail = fmt("inequality fails at %zu of %zu sampled n (margin %.3f at n=1e3, %.3f at n=1e6)",
                             failed_samples, rep.samples.size(), rep.samples.front().margin, rep.final_margin);
    if (rep.suffix_start) detail += fmt(", holds from n = %llu", static_cast<unsigned long long>(*rep.suffix_start));
    detail += fmt("; diagnostic %.4f -> %.4f, %s, ratio %.3f (need < 0.5)", d.front(), d.back(),
                  decreasing ? "strictly decreasing" : "not decreasing", d.back() / d.front());
    return {pass, detail};
}

Outcome ema_not_scheme() {
    const auto r100 = sc::check_scheme(sc::WeightSeq::ema(0.9), sc::PsiSpec::log_power(1.0), 2, 100);
    const auto r1000 = sc::check_scheme(sc::WeightSeq::ema(0.9), sc::PsiSpec::log_power(1.0), 2, 1000);
    const bool pass = !r1000.suffix_holds && r1000.final_margin < r100.final_margin && r100.final_margin < 0.0;
    return {pass, fmt("gamma = 0.9: margin %.3f at n=1e2, %.3f at n=1e3", r100.final_margin, r1000.final_margin)};
}

Outcome jump_convergence() {
    const int seeds = 50;
    int pema_ok = 0;
    int ema_ok = 0;
    double worst = 0.0;
    double min_ema_std = INFINITY;
    for (int s = 1; s <= seeds; ++s) {
        const auto x = pr::gen_jump(0.9, 100000, pema::derive_seed(0, s));
        Averager p(AveragerSpec::pema(0.75));
        Averager e(AveragerSpec::ema(0.99));
        std::vector<double> tail;
        tail.reserve(10000);
        for (std::size_t i = 0; i < x.size(); ++i) {
            p.update(x[i]);
            e.update(x[i]);
            if (i >= x.size() - 10000) tail.push_back(e.estimate());
        }
        worst = std::max(worst, std::abs(p.estimate()));
        pema_ok += std::abs(p.estimate()) < 0.05;
        const double sd = std_of(tail);
        min_ema_std = std::min(min_ema_std, sd);
        ema_ok += sd > 0.01;
    }
    const bool pass = pema_ok >= 48 && ema_ok >= 48;
    return {pass, fmt("p-EMA |final| < 0.05 in %d/50 seeds (need >= 48, worst %.4f); EMA tail std > 0.01 in %d/50 "
                      "(min %.4f)",
                      pema_ok, worst, ema_ok, min_ema_std)};
}

Outcome high_p_counterexample() {
    // Direct summation of sum_{n>65} n^{-1.5}, with the integral bound for the tail beyond 1e7.
    long double sum = 0.0L;
    const std::uint64_t cut = 10000000;
    for (std::uint64_t n = cut; n > 65; --n) sum += std::pow(static_cast<long double>(n), -1.5L);
    sum += 2.0L / std::sqrt(static_cast<long double>(cut));
    const bool sum_ok = sum < 0.25L;

    Averager avg(AveragerSpec::pema(1.5, true));
    double lowest = INFINITY;
    for (std::uint64_t n = 1; n <= 1000000; ++n) {
        avg.update(n <= 65 ? 1.0 : -1.0);
        lowest = std::min(lowest, avg.estimate());
    }
    return {sum_ok && lowest > 0.5,
            fmt("sum_{n>65} n^-1.5 <= %.5f (< 0.25); min estimate over n <= 1e6 is %.5f (> 0.5)",
                static_cast<double>(sum), lowest)};
}

Outcome low_p_counterexample() {
    const int seeds = 20;
    const double p = 0.3;
    int with_event = 0;
    double events_1e4 = 0.0;
    double events_1e6 = 0.0;
    for (int s = 1; s <= seeds; ++s) {
        const auto x = pr::gen_heavy_tail(4.0, 1000000, pema::derive_seed(0, s));
        Averager avg(AveragerSpec::pema(p, true));
        int count = 0;
        for (std::uint64_t n = 1; n <= x.size(); ++n) {
            avg.update(x[n - 1]);
            if (avg.estimate() >= 3.0 - std::pow(double(n), -p)) ++count;
            if (n == 10000) events_1e4 += count;
        }
        events_1e6 += count;
        with_event += count > 0;
    }
    events_1e4 /= seeds;
    events_1e6 /= seeds;
    const bool pass = with_event >= 18 && events_1e6 > events_1e4;
    return {pass, fmt("seeds with an excursion: %d/20 (need >= 18); mean count %.2f at N=1e4, %.2f at N=1e6",
                      with_event, events_1e4, events_1e6)};
}

Outcome heavy_tail_sampler() {
    auto x = pr::gen_heavy_tail(4.0, 100000, 10);
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = 1.0 - std::pow(x[i], -3.0);
        ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    const double m = mean_of(pr::gen_heavy_tail(4.0, 1000000, 11));
    return {ks < 0.01 && std::abs(m - 1.5) < 0.01,
            fmt("KS distance %.5f at 1e5 (tol 0.01); mean %.5f at 1e6 (target 1.5, tol 0.01)", ks, m)};
}

Outcome sop_centering() {
    const auto sop = sg::DefaultProblem{}.build(7);
    pema::Rng rng(11);
    const int n = 100000;
    const auto d = static_cast<Eigen::Index>(sop.dim());
    sg::Matrix sum = sg::Matrix::Zero(d, d);
    sg::Matrix sum2 = sg::Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        const sg::Matrix w = sop.sample_instance(rng).a_matrix - sop.mean_hessian();
        sum += w;
        sum2 += w.cwiseProduct(w);
    }
    const sg::Matrix mean = sum / n;
    const sg::Matrix var = sum2 / n - mean.cwiseProduct(mean);
    double worst_z = 0.0;
    int outside = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j) {
            const double z = std::abs(mean(i, j)) / std::sqrt(var(i, j) / n);
            worst_z = std::max(worst_z, z);
            outside += z > 3.0;
        }
    return {outside == 0,
            fmt("%d of %lld distinct entries of mean W beyond 3 standard errors (largest %.2f SE) over 1e5 draws",
                outside, static_cast<long long>(d * (d + 1) / 2), worst_z)};
}

struct SgdContext {
    sg::QuadraticSop sop;
    double L_hat;
    double alpha;
};

const SgdContext& sgd_context() {
    static const SgdContext ctx = [] {
        const pema::harness::ExperimentConfig cfg = pema::harness::preset(pema::harness::ExperimentKind::SgdSuggestedSteps);
        auto sop = cfg.problem.build(cfg.sop_seed);
        const double L_hat = sg::smoothness_estimate(sop, cfg.l_samples, pema::derive_seed(cfg.sop_seed, 1));
        return SgdContext{std::move(sop), L_hat, cfg.alpha_factor / L_hat};
    }();
    return ctx;
}

const sg::AdaptiveTrace& pema_trace() {
    static const sg::AdaptiveTrace trace = [] {
        const auto& c = sgd_context();
        return sg::run_adaptive_trace(c.sop, c.alpha, 50000, AveragerSpec::pema(0.75), std::nullopt, 1, c.L_hat,
                                      sg::TraceOptions{false});
    }();
    return trace;
}

Outcome contraction() {
    const auto& c = sgd_context();
    const double v = sg::estimate_contraction(c.sop, c.alpha, 10000, 12);
    return {v < -1e-3, fmt("mean log ||I - alpha A_xi|| = %.5f at alpha = 0.5/L_hat = %.5f (need < -1e-3)", v,
                           c.alpha)};
}

Outcome suggested_step_threshold() {
    const auto& c = sgd_context();
    const double limit = c.alpha / 2 + 0.05 * c.alpha;
    const std::uint64_t n_iters = 50000;

    const auto& pt = pema_trace();
    const double pema_final = *pt.records.back().alpha_suggested;
    const auto zeta_tail = pt.zeta_series(n_iters - 5000);
    const double zeta_std = std_of(zeta_tail);
    const bool pema_ok = pema_final <= limit && zeta_std < 0.02;

    const auto at = sg::run_adaptive_trace(c.sop, c.alpha, n_iters, AveragerSpec::arithmetic(), std::nullopt, 1,
                                           c.L_hat, sg::TraceOptions{false});
    const double arith_final = *at.records.back().alpha_suggested;
    const bool arith_ok = arith_final <= limit;

    // EMA: post-stabilization means k > n_iters / 10.
    int spiking = 0;
    int averaged_ok = 0;
    double max_seen = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto et = sg::run_adaptive_trace(c.sop, c.alpha, n_iters, AveragerSpec::ema(0.99), std::nullopt, s,
                                               c.L_hat, sg::TraceOptions{false});
        const auto steps = et.alpha_suggested_series(n_iters / 10);
        const double peak = *std::max_element(steps.begin(), steps.end());
        max_seen = std::max(max_seen, peak);
        spiking += peak > c.alpha / 2;
        averaged_ok += mean_of(steps) <= limit;
    }
    const bool ema_ok = averaged_ok == 20 && spiking >= 10;
    return {pema_ok && arith_ok && ema_ok,
            fmt("alpha = %.5f, alpha/2 = %.5f, limit %.5f; p-EMA final %.5f, zeta std %.5f (tol 0.02); arithmetic "
                "final %.5f; EMA time-average within limit in %d/20, spike above alpha/2 in %d/20 seeds (need >= "
                "10, max %.5f)",
                c.alpha, c.alpha / 2, limit, pema_final, zeta_std, arith_final, averaged_ok, spiking, max_seen)};
}

Outcome correlation_decay() {
    const auto g = pema_trace().g_tilde_series();
    const auto ac = pr::autocorrelation(g, 20);
    const double r = std::abs(ac.rho[20]) / ac.rho[0];
    return {r < 0.1, fmt("|rho(20)| / rho(0) = %.5f on the g trace, 5e4 iterations (need < 0.1)", r)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility() {
    namespace fs = std::filesystem;
    using namespace pema::harness;
    const auto root = fs::temp_directory_path() / ("pema_acceptance_" + std::to_string(::getpid()));
    std::size_t compared = 0;
    std::size_t differing = 0;
    for (auto kind : all_experiments()) {
        auto cfg = preset(kind);
        if (kind == ExperimentKind::SgdSuggestedSteps) cfg.iters = 5000;
        if (cfg.seeds.size() > 4) cfg.seeds.resize(4);
        cfg.output_dir = root / (experiment_id(kind) + "_a");
        const auto a = run_experiment(cfg);
        cfg.output_dir = root / (experiment_id(kind) + "_b");
        const auto b = run_experiment(cfg);
        for (std::size_t i = 0; i < a.files.size(); ++i) {
            if (a.files[i].size() < 4 || a.files[i].substr(a.files[i].size() - 4) != ".csv") continue;
            ++compared;
            differing += a.files[i] != b.files[i] || slurp(a.output_dir / a.files[i]) != slurp(b.output_dir / b.files[i]);
        }
    }
    fs::remove_all(root);
    return {compared > 0 && differing == 0,
            fmt("%zu CSV files compared across all experiments, %zu differ", compared, differing)};
}

struct Check {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Check> checks = {
        {1, "p=1 equals arithmetic mean", p_one_equivalence},
        {2, "last-weight law", last_weight_law},
        {3, "weight monotonicity", weight_monotonicity},
        {4, "profile/recursion agreement", profile_agreement},
        {5, "scheme condition p=0.75 on [1e3,1e6]", scheme_condition},
        {6, "EMA is not a scheme", ema_not_scheme},
        {7, "jump-process convergence", jump_convergence},
        {8, "p>1 counterexample", high_p_counterexample},
        {9, "p<1/2 counterexample", low_p_counterexample},
        {10, "heavy-tail sampler", heavy_tail_sampler},
        {11, "SOP centering", sop_centering},
        {12, "contraction on average", contraction},
        {13, "suggested-step threshold", suggested_step_threshold},
        {14, "correlation decay of g", correlation_decay},
        {15, "reproducibility", reproducibility},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--only N]...\n", argv[0]);
            return 2;
        }
    }
    int failures = 0;
    for (const auto& c : checks) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %02d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
