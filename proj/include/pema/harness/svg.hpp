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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pema::harness {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct ChartOptions {
    std::string title;
    std::string x_label = "n";
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::optional<double> y_min;
    std::optional<double> y_max;
    /// Horizontal reference lines (e.g. a threshold), drawn dotted.
    std::vector<std::pair<std::string, double>> reference_lines;
    int width = 900;
    int height = 520;
    /// Series longer than this are thinned by a uniform stride.
    std::size_t max_points = 2000;
};

/// Self-contained SVG line chart with axes, tick labels and a legend.
std::string render_svg(std::span<const PlotSeries> series, const ChartOptions& options);

/// Throws std::invalid_argument when there is nothing to plot and
/// std::runtime_error naming the path on I/O failure.
void emit_svg(std::span<const PlotSeries> series, const ChartOptions& options, const std::filesystem::path& path);

}  // namespace pema::harness
