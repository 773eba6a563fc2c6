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
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pema/rng.hpp"

namespace pema::process {

/// exp(-(x/20)^6): flat near 0, falls off around |x| = 20.
double trend_function(double x);

/// Noisy evaluations of trend_function on an evenly spaced grid.
/// `hold_prefix` points at f(grid_lo) are emitted before the grid, which
/// delays the trend by that many steps.
struct TrendNoise {
    double grid_lo = -0.5;
    double grid_hi = 1.5;
    std::uint64_t n_points = 10000;
    double noise_std = 0.25;
    std::uint64_t hold_prefix = 0;
};

/// Two-state chain on {-1, +1} that keeps its value with probability q.
struct Jump {
    double q = 0.9;
};

/// iid draws from the density (s-1) x^{-s} on [1, inf).
struct HeavyTail {
    double s = 4.0;
};

/// iid fair signs; the first `forced_prefix` values are +1.
struct Rademacher {
    std::uint64_t forced_prefix = 0;
};

struct ProcessSpec {
    std::variant<TrendNoise, Jump, HeavyTail, Rademacher> kind = Jump{};
    std::uint64_t seed = 0;

    void validate() const;
    std::string name() const;
    bool has_true_value() const { return std::holds_alternative<TrendNoise>(kind); }
};

struct Sample {
    std::optional<double> true_value;
    double observation = 0.0;
};

/// Value-state generator; copies evolve independently.
class ProcessStream {
public:
    explicit ProcessStream(ProcessSpec spec);

    Sample next();
    std::uint64_t emitted() const noexcept { return emitted_; }
    const ProcessSpec& spec() const noexcept { return spec_; }

private:
    ProcessSpec spec_;
    Rng rng_;
    std::uint64_t emitted_ = 0;
    double jump_state_ = 0.0;
};

std::vector<Sample> generate(const ProcessSpec& spec, std::uint64_t count);

/// Requires count <= n_points + hold_prefix.
std::vector<Sample> gen_trend_noise(const TrendNoise& spec, std::uint64_t count, std::uint64_t seed);
std::vector<double> gen_jump(double q, std::uint64_t count, std::uint64_t seed);
std::vector<double> gen_heavy_tail(double s, std::uint64_t count, std::uint64_t seed);
std::vector<double> gen_rademacher(std::uint64_t count, std::uint64_t seed, std::uint64_t forced_prefix = 0);

/// Inverse CDF of F(x) = 1 - x^{1-s}: returns (1-u)^{-1/(s-1)} >= 1.
double sample_heavy_tail(double s, double u);

/// Mean (s-1)/(s-2) of the heavy-tailed law.
double heavy_tail_mean(double s);

struct AutocorrEstimate {
    std::size_t max_lag = 0;
    std::vector<double> rho;  ///< rho[m], m = 0..max_lag; rho[0] is the variance
    double mean = 0.0;

    /// rho[m] / rho[0]; zero when the variance vanishes.
    double normalized(std::size_t m) const;
};

/**
 * Empirical autocovariance with the biased 1/N normalization:
 *   rho(m) = (1/N) sum_{i=1}^{N-m} (x_i - mean)(x_{i+m} - mean).
 * Requires series.size() > max_lag.
 */
AutocorrEstimate autocorrelation(std::span<const double> series, std::size_t max_lag);

}  // namespace pema::process
