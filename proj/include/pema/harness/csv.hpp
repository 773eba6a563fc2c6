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
#include <string>
#include <string_view>
#include <vector>

namespace pema::harness {

/// A missing cell is written as an empty field.
using Cell = std::optional<double>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

/// Header line plus one line per row, LF terminated.
std::string to_csv_text(const CsvTable& table);

/// Throws std::invalid_argument for an empty table (no file is created) and
/// std::runtime_error naming the path on I/O failure.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace pema::harness
