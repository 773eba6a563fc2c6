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
#include <string>
#include <vector>

namespace pema {

enum class AveragerKind { Arithmetic, Ema, Pema };

/**
 * Parameters of one averager.
 *
 * For Ema, `gamma` is the constant mixing factor in (0,1). For Pema, `p` is
 * the decay exponent of the newest-observation weight (n+1)^{-p}. Only
 * p in (1/2, 1] is accepted unless `unsafe_range` is set, which admits any
 * p > 0 so that the non-convergent regimes can be simulated.
 */
struct AveragerSpec {
    AveragerKind kind = AveragerKind::Arithmetic;
    double gamma = 0.9;
    double p = 1.0;
    bool unsafe_range = false;

    static AveragerSpec arithmetic() { return {AveragerKind::Arithmetic, 0.9, 1.0, false}; }
    static AveragerSpec ema(double gamma) { return {AveragerKind::Ema, gamma, 1.0, false}; }
    static AveragerSpec pema(double p, bool unsafe_range = false) {
        return {AveragerKind::Pema, 0.9, p, unsafe_range};
    }

    /// Throws std::invalid_argument naming the offending parameter.
    void validate() const;

    /// Short stable label, e.g. "pema-0.75", "ema-0.99", "arithmetic".
    std::string label() const;

    /// Parses the label syntax above ("pema:0.75" is accepted too).
    static AveragerSpec parse(const std::string& text, bool unsafe_range = false);

    friend bool operator==(const AveragerSpec&, const AveragerSpec&) = default;
};

/**
 * Streaming state of one scalar averager.
 *
 * All three kinds share the recursion est_{n+1} = g_n est_n + (1 - g_n) obs_{n+1}
 * with g_n = n/(n+1) (arithmetic), g_n = gamma (EMA) and g_n = 1 - (n+1)^{-p}
 * (p-EMA), where n is the number of observations consumed before the update.
 * The first observation always overwrites the estimate, which realizes the
 * initialization est_0 = obs_1.
 *
 * The estimate is a convex combination of the observations seen so far.
 * A single state must not be updated concurrently.
 */
class Averager {
public:
    explicit Averager(const AveragerSpec& spec);

    /// Consumes one observation. Non-finite values are rejected.
    void update(double obs);

    /// Factor g_n applied to the old estimate when the observation with
    /// 1-based index `n + 1` arrives.
    double mixing_factor(std::uint64_t n) const;
    /// 1 - g_n, the weight the (n+1)-th observation receives.
    double newest_weight(std::uint64_t n) const;

    /// Throws std::logic_error before the first observation.
    double estimate() const;

    bool empty() const noexcept { return count_ == 0; }
    std::uint64_t count() const noexcept { return count_; }
    const AveragerSpec& spec() const noexcept { return spec_; }

private:
    AveragerSpec spec_;
    double estimate_ = 0.0;
    std::uint64_t count_ = 0;
};

/// Functional form of Averager::update.
[[nodiscard]] Averager updated(Averager state, double obs);

/// Weights that observations 1..n carry in the estimate after n updates.
struct WeightProfile {
    std::uint64_t n = 0;
    std::vector<double> weights;
};

/**
 * Exact weight profile after n updates.
 *
 * p-EMA weights are evaluated in log domain, log beta_k - log Lambda_n, so
 * that the unnormalized weights never overflow. Throws for n == 0.
 */
WeightProfile weight_profile(const AveragerSpec& spec, std::uint64_t n);

/// Weight of the newest observation in the estimate after n updates.
double last_weight(const AveragerSpec& spec, std::uint64_t n);

}  // namespace pema
