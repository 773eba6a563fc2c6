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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pema::scheme {

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b) noexcept;

/// Streaming log-sum-exp accumulator.
class LogSumExp {
public:
    void add(double log_term) noexcept;
    double value() const noexcept { return value_; }
    bool empty() const noexcept { return empty_; }

private:
    double value_ = 0.0;
    bool empty_ = true;
};

/**
 * log beta_k for p-EMA, where
 *
 *   beta_k = k^{-p} prod_{s=2}^{k} (1 - s^{-p})^{-1}
 *
 * is the unnormalized weight of observation k. beta_1 = 1 and beta_k == 1 for
 * p == 1. Requires k >= 1 and p > 0.
 */
double log_beta(std::uint64_t k, double p);

/// log Lambda_n = log sum_{k<=n} beta_k by streaming log-sum-exp.
double log_lambda(std::uint64_t n, double p);

/**
 * Incremental evaluation of (log beta_n, log Lambda_n) for n = 1, 2, ...
 * Each call to advance() costs O(1).
 */
class BetaSequence {
public:
    explicit BetaSequence(double p);

    void advance();
    std::uint64_t n() const noexcept { return n_; }
    double log_beta() const noexcept { return log_beta_; }
    double log_lambda() const noexcept { return log_lambda_.value(); }

private:
    double p_;
    std::uint64_t n_ = 0;
    double log_product_ = 0.0;  // sum_{s=2}^{n} -log(1 - s^{-p})
    double log_beta_ = 0.0;
    LogSumExp log_lambda_;
};

/// psi(x) = x^eps (Power) or psi(x) = log^{1+eps}(x) (LogPower), eps > 0.
struct PsiSpec {
    enum class Kind { Power, LogPower };
    Kind kind = Kind::LogPower;
    double eps = 1.0;

    static PsiSpec power(double eps) { return {Kind::Power, eps}; }
    static PsiSpec log_power(double eps) { return {Kind::LogPower, eps}; }

    void validate() const;

    /// log psi(x) given log x. Empty when psi is undefined there
    /// (LogPower needs x > 1).
    std::optional<double> log_value(double log_x) const;

    std::string describe() const;
};

/**
 * A positive weight sequence b_1, b_2, ... with streaming log partial sums
 * log A_n. The generator receives n (1-based) and returns log b_n.
 */
class WeightSeq {
public:
    using Generator = std::function<double(std::uint64_t)>;

    WeightSeq(std::string name, Generator log_b);

    /// b_n = 1.
    static WeightSeq arithmetic();
    /// p-EMA weights beta_n (evaluated incrementally).
    static WeightSeq pema(double p);
    /// Weights that reproduce EMA with est_0 = obs_1: b_1 = 1 and
    /// b_n = (1 - gamma) gamma^{-(n-1)} for n >= 2, so A_n = gamma^{-(n-1)}.
    static WeightSeq ema(double gamma);

    void advance();
    std::uint64_t n() const noexcept { return n_; }
    double log_b() const noexcept { return log_b_; }
    double log_a() const noexcept { return log_a_.value(); }
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    Generator log_b_gen_;
    std::uint64_t n_ = 0;
    double log_b_ = 0.0;
    LogSumExp log_a_;
};

struct SchemeSample {
    std::uint64_t n = 0;
    double log_b = 0.0;
    double log_a = 0.0;
    double margin = 0.0;  ///< log A_n - log psi(A_n) - log b_n
    bool holds = false;
};

/**
 * Outcome of checking b_n <= A_n / psi(A_n) on a finite window.
 *
 * Every n in [n_start, n_end] is evaluated; `samples` keeps a log-spaced
 * subset for reporting. The definition only constrains sufficiently large
 * n, so `suffix_start` is the smallest n from which the inequality holds
 * up to n_end.
 */
struct SchemeReport {
    std::string weights;
    std::string psi;
    std::uint64_t n_start = 0;
    std::uint64_t n_end = 0;
    std::vector<SchemeSample> samples;
    bool holds_everywhere = false;
    std::optional<std::uint64_t> suffix_start;
    bool suffix_holds = false;
    bool non_decreasing = true;  ///< b_n non-decreasing on the window
    double min_margin = 0.0;
    double final_margin = 0.0;
    std::uint64_t skipped = 0;  ///< n where psi(A_n) was undefined
    std::vector<std::string> warnings;
};

SchemeReport check_scheme(WeightSeq weights, const PsiSpec& psi, std::uint64_t n_start,
                          std::uint64_t n_end, std::size_t max_samples = 64);

/// Open interval of eps for which log Lambda_n / n^{p/(1+eps)} -> 0.
/// Upper bound is +inf for p == 1.
struct EpsRange {
    double lo = 0.0;
    double hi = 0.0;
};
EpsRange admissible_eps(double p);

/**
 * log Lambda_n / n^{p/(1+eps)} at each requested n (increasing).
 *
 * Requires p in (1/2, 1] and eps inside admissible_eps(p), unless
 * `unsafe_range` is set, which only requires p > 0 and eps > 0.
 */
std::vector<double> scheme_diagnostic(double p, double eps, std::span<const std::uint64_t> n_samples,
                                      bool unsafe_range = false);

/// Roughly `count` distinct integers, log-spaced over [lo, hi], including both ends.
std::vector<std::uint64_t> log_spaced(std::uint64_t lo, std::uint64_t hi, std::size_t count);

}  // namespace pema::scheme
