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
#include <string>
#include <vector>

#include "pema/averager.hpp"
#include "pema/sop.hpp"

namespace pema::sgd {

/// One iteration of a constant-step SGD run with step-size estimation.
/// Optional fields are missing while they cannot be computed.
struct TraceRecord {
    std::uint64_t k = 0;  ///< 1-based iteration index
    Vector x;             ///< iterate x_k (empty unless iterates are kept)
    double g_tilde = 0.0;
    /// sigma observation available at iteration k, built from x_k and the
    /// instances of iterations k-1 and k; missing for k = 1.
    std::optional<double> sigma_tilde;
    double g_hat = 0.0;
    std::optional<double> sigma_hat;
    std::optional<double> zeta_raw;  ///< 1 - sigma_hat / g_hat
    std::optional<double> zeta;      ///< zeta_raw clamped to [0, 1]
    std::optional<double> alpha_suggested;
};

struct AdaptiveTrace {
    AveragerSpec averager;
    double alpha = 0.0;
    double L_hat = 0.0;
    std::vector<TraceRecord> records;
    std::vector<std::string> warnings;

    /// g_tilde column as a plain series.
    std::vector<double> g_tilde_series(std::size_t from = 0) const;
    /// zeta (clamped) from record index `from` on, skipping missing values.
    std::vector<double> zeta_series(std::size_t from = 0) const;
    std::vector<double> alpha_suggested_series(std::size_t from = 0) const;
};

struct TraceOptions {
    bool keep_iterates = true;
};

/**
 * Runs SGD with constant step alpha on `sop` and feeds the observations
 * g_tilde and sigma_tilde into two averagers of kind `averager`. The
 * suggested step zeta_k / L_hat is recorded but never applied.
 *
 * x0 defaults to a standard normal draw from the trace's random stream.
 * A warning is attached when alpha > 1 / L_hat. Requires n_iters >= 2.
 */
AdaptiveTrace run_adaptive_trace(const QuadraticSop& sop, double alpha, std::uint64_t n_iters,
                                 const AveragerSpec& averager, const std::optional<Vector>& x0, std::uint64_t seed,
                                 double L_hat, const TraceOptions& options = {});

}  // namespace pema::sgd
