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
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pema/averager.hpp"
#include "pema/processes.hpp"
#include "pema/sop.hpp"

namespace pema::harness {

enum class ExperimentKind {
    Weights,
    BadWeights,
    TrendComparison,
    JumpComparison,
    CounterexampleHighP,
    CounterexampleLowP,
    SgdSuggestedSteps,
    TrendShift,
};

/// Invalid configuration. `field()` is "section.key" of the culprit.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Stable identifier, e.g. "jump" for JumpComparison.
std::string experiment_id(ExperimentKind kind);
/// Inverse of experiment_id; throws ConfigError on unknown names.
ExperimentKind parse_experiment_id(std::string_view id);
const std::vector<ExperimentKind>& all_experiments();

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Weights;
    std::vector<AveragerSpec> averagers;
    /// Admit p-EMA exponents outside (1/2, 1].
    bool unsafe_range = false;
    std::vector<std::uint64_t> seeds{1};
    std::uint64_t iters = 10000;
    std::filesystem::path output_dir = "pema-out";
    bool svg = true;

    // [process]
    process::TrendNoise trend;
    double q = 0.9;
    double s = 4.0;
    std::uint64_t forced_prefix = 65;
    /// After the forced prefix, emit -1 forever instead of fair signs.
    bool worst_case = false;

    // [sgd]
    sgd::DefaultProblem problem;
    std::uint64_t sop_seed = 7;
    double alpha_factor = 0.5;  ///< alpha = alpha_factor / L_hat
    std::uint64_t l_samples = 1000;
    sgd::LinearNoise linear_noise = sgd::LinearNoise::Uniform;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Defaults used to reproduce one figure.
ExperimentConfig preset(ExperimentKind kind);

/**
 * Reads the INI-style text format written by to_ini. Keys not present keep
 * the preset of the experiment named in [experiment] kind, or of
 * `fallback` when the file does not name one. Unknown sections or keys and
 * malformed values raise ConfigError naming the field.
 */
ExperimentConfig parse_config(std::string_view text, ExperimentKind fallback = ExperimentKind::Weights);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind fallback = ExperimentKind::Weights);

/// Canonical serialization listing every key.
std::string to_ini(const ExperimentConfig& config);

/// 64-bit FNV-1a of to_ini(config), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Help text describing every key and its default.
std::string config_reference();

/// Parses "1,2,5" or "1..50" (inclusive) or a mix of both.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace pema::harness
