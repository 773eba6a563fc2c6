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
#include <string>
#include <vector>

#include "pema/harness/config.hpp"

namespace pema::harness {

/// One averager run on one seed.
struct RunRecord {
    std::uint64_t seed = 0;
    std::string averager;
    std::string file;  ///< relative to the output directory
    double final_value = 0.0;
    /// Experiment specific count, e.g. threshold excursions in the low-p run.
    std::optional<double> events;
};

struct Manifest {
    std::string experiment;
    std::string config_hash;
    std::string config_text;
    std::filesystem::path output_dir;
    std::vector<std::uint64_t> seeds;
    /// Every file written, relative to output_dir, in write order.
    std::vector<std::string> files;
    std::vector<RunRecord> runs;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

/**
 * Runs one experiment and writes its artifacts to config.output_dir:
 * one CSV per averager and seed, config.ini, an optional figure.svg and
 * manifest.json. Seeds run concurrently; results are joined in seed order,
 * so the output does not depend on scheduling.
 *
 * Throws ConfigError for an invalid config and std::runtime_error naming
 * the path when the output directory cannot be written.
 */
Manifest run_experiment(const ExperimentConfig& config);

}  // namespace pema::harness
