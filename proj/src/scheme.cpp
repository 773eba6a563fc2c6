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

#include "pema/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pema::scheme {

namespace {

void require_positive_p(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        std::ostringstream msg;
        msg << "p must be a finite positive number, got " << p;
        throw std::invalid_argument(msg.str());
    }
}

// -log(1 - s^{-p}) for s >= 2.
double neg_log_one_minus_pow(std::uint64_t s, double p) {
    return -std::log1p(-std::exp(-p * std::log(static_cast<double>(s))));
}

// Equality cases (arithmetic weights with psi(x) = x) must not fail on
// rounding in the streamed log A_n.
double margin_tolerance(double log_a) { return 1e-12 * std::max(1.0, std::abs(log_a)); }

}  // namespace

double log_add_exp(double a, double b) noexcept {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

void LogSumExp::add(double log_term) noexcept {
    if (empty_) {
        value_ = log_term;
        empty_ = false;
        return;
    }
    value_ = log_add_exp(value_, log_term);
}

BetaSequence::BetaSequence(double p) : p_(p) { require_positive_p(p); }

void BetaSequence::advance() {
    ++n_;
    if (n_ >= 2) log_product_ += neg_log_one_minus_pow(n_, p_);
    log_beta_ = -p_ * std::log(static_cast<double>(n_)) + log_product_;
    log_lambda_.add(log_beta_);
}

double log_beta(std::uint64_t k, double p) {
    require_positive_p(p);
    if (k == 0) throw std::invalid_argument("log_beta: k must be >= 1");
    double log_product = 0.0;
    for (std::uint64_t s = 2; s <= k; ++s) log_product += neg_log_one_minus_pow(s, p);
    return -p * std::log(static_cast<double>(k)) + log_product;
}

double log_lambda(std::uint64_t n, double p) {
    if (n == 0) throw std::invalid_argument("log_lambda: n must be >= 1");
    BetaSequence seq(p);
    for (std::uint64_t k = 1; k <= n; ++k) seq.advance();
    return seq.log_lambda();
}

void PsiSpec::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        std::ostringstream msg;
        msg << "psi exponent eps must be positive, got " << eps;
        throw std::invalid_argument(msg.str());
    }
}

std::optional<double> PsiSpec::log_value(double log_x) const {
    if (kind == Kind::Power) return eps * log_x;
    if (!(log_x > 0.0)) return std::nullopt;
    return (1.0 + eps) * std::log(log_x);
}

std::string PsiSpec::describe() const {
    std::ostringstream out;
    if (kind == Kind::Power)
        out << "x^" << eps;
    else
        out << "log(x)^" << (1.0 + eps);
    return out.str();
}

WeightSeq::WeightSeq(std::string name, Generator log_b)
    : name_(std::move(name)), log_b_gen_(std::move(log_b)) {
    if (!log_b_gen_) throw std::invalid_argument("WeightSeq: empty generator");
}

WeightSeq WeightSeq::arithmetic() {
    return WeightSeq("arithmetic", [](std::uint64_t) { return 0.0; });
}

WeightSeq WeightSeq::pema(double p) {
    require_positive_p(p);
    std::ostringstream name;
    name << "pema-" << p;
    return WeightSeq(name.str(), [p, seq = BetaSequence(p)](std::uint64_t n) mutable {
        if (seq.n() > n) seq = BetaSequence(p);
        while (seq.n() < n) seq.advance();
        return seq.log_beta();
    });
}

WeightSeq WeightSeq::ema(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ema weights: gamma must lie in (0,1)");
    std::ostringstream name;
    name << "ema-" << gamma;
    const double log_gamma = std::log(gamma);
    const double log_one_minus = std::log1p(-gamma);
    return WeightSeq(name.str(), [=](std::uint64_t n) {
        if (n == 1) return 0.0;
        return log_one_minus - static_cast<double>(n - 1) * log_gamma;
    });
}

void WeightSeq::advance() {
    ++n_;
    log_b_ = log_b_gen_(n_);
    log_a_.add(log_b_);
}

SchemeReport check_scheme(WeightSeq weights, const PsiSpec& psi, std::uint64_t n_start, std::uint64_t n_end,
                          std::size_t max_samples) {
    psi.validate();
    if (n_start < 2) throw std::invalid_argument("check_scheme: n_start must be >= 2");
    if (n_end < n_start) throw std::invalid_argument("check_scheme: n_end must be >= n_start");

    SchemeReport report;
    report.weights = weights.name();
    report.psi = psi.describe();
    report.n_start = n_start;
    report.n_end = n_end;

    const auto sample_points = log_spaced(n_start, n_end, std::max<std::size_t>(max_samples, 2));
    auto next_sample = sample_points.begin();

    std::optional<std::uint64_t> last_failure;
    std::uint64_t evaluated = 0;
    double prev_log_b = 0.0;
    bool have_prev = false;
    report.min_margin = std::numeric_limits<double>::infinity();

    while (weights.n() < n_end) {
        weights.advance();
        const std::uint64_t n = weights.n();
        const double log_b = weights.log_b();
        if (n < n_start) {
            prev_log_b = log_b;
            have_prev = true;
            continue;
        }
        if (have_prev && log_b < prev_log_b - margin_tolerance(log_b)) report.non_decreasing = false;
        prev_log_b = log_b;
        have_prev = true;

        const double log_a = weights.log_a();
        const auto log_psi = psi.log_value(log_a);
        if (!log_psi) {
            ++report.skipped;
            continue;
        }
        const double margin = log_a - *log_psi - log_b;
        const bool holds = margin >= -margin_tolerance(log_a);
        ++evaluated;
        if (!holds) last_failure = n;
        report.min_margin = std::min(report.min_margin, margin);
        report.final_margin = margin;

        while (next_sample != sample_points.end() && *next_sample < n) ++next_sample;
        if (next_sample != sample_points.end() && *next_sample == n) {
            report.samples.push_back({n, log_b, log_a, margin, holds});
            ++next_sample;
        }
    }

    if (report.skipped > 0) {
        std::ostringstream msg;
        msg << "skipped " << report.skipped << " n with A_n <= 1 where " << report.psi << " is undefined";
        report.warnings.push_back(msg.str());
    }
    if (evaluated == 0) {
        report.warnings.push_back("no n in the window could be evaluated");
        report.min_margin = 0.0;
        return report;
    }
    report.holds_everywhere = !last_failure.has_value();
    if (!last_failure) {
        report.suffix_start = n_start;
    } else if (*last_failure < n_end) {
        report.suffix_start = *last_failure + 1;
    }
    report.suffix_holds = report.suffix_start.has_value();
    return report;
}

EpsRange admissible_eps(double p) {
    if (!(p > 0.5 && p <= 1.0)) {
        std::ostringstream msg;
        msg << "admissible eps is only defined for p in (1/2, 1], got " << p;
        throw std::invalid_argument(msg.str());
    }
    if (p == 1.0) return {0.0, std::numeric_limits<double>::infinity()};
    return {0.0, (2.0 * p - 1.0) / (1.0 - p)};
}

std::vector<double> scheme_diagnostic(double p, double eps, std::span<const std::uint64_t> n_samples,
                                      bool unsafe_range) {
    require_positive_p(p);
    if (!unsafe_range) {
        if (!(p > 0.5 && p <= 1.0)) {
            std::ostringstream msg;
            msg << "scheme_diagnostic: p must lie in (1/2, 1], got " << p;
            throw std::invalid_argument(msg.str());
        }
        const auto range = admissible_eps(p);
        if (!(eps > range.lo && eps < range.hi)) {
            std::ostringstream msg;
            msg << "scheme_diagnostic: eps must lie in (" << range.lo << ", " << range.hi << ") for p = " << p
                << ", got " << eps;
            throw std::invalid_argument(msg.str());
        }
    } else if (!(eps > 0.0)) {
        throw std::invalid_argument("scheme_diagnostic: eps must be positive");
    }
    for (std::size_t i = 0; i < n_samples.size(); ++i) {
        if (n_samples[i] == 0) throw std::invalid_argument("scheme_diagnostic: sample n must be >= 1");
        if (i > 0 && n_samples[i] <= n_samples[i - 1])
            throw std::invalid_argument("scheme_diagnostic: samples must be strictly increasing");
    }

    const double exponent = p / (1.0 + eps);
    std::vector<double> out;
    out.reserve(n_samples.size());
    BetaSequence seq(p);
    for (const auto n : n_samples) {
        while (seq.n() < n) seq.advance();
        out.push_back(seq.log_lambda() / std::pow(static_cast<double>(n), exponent));
    }
    return out;
}

std::vector<std::uint64_t> log_spaced(std::uint64_t lo, std::uint64_t hi, std::size_t count) {
    if (lo == 0 || hi < lo) throw std::invalid_argument("log_spaced: need 1 <= lo <= hi");
    std::vector<std::uint64_t> out;
    if (count < 2 || lo == hi) {
        out.push_back(lo);
        if (hi != lo) out.push_back(hi);
        return out;
    }
    const double a = std::log(static_cast<double>(lo));
    const double b = std::log(static_cast<double>(hi));
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        auto v = static_cast<std::uint64_t>(std::llround(std::exp(a + t * (b - a))));
        v = std::clamp(v, lo, hi);
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    if (out.back() != hi) out.push_back(hi);
    return out;
}

}  // namespace pema::scheme
