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

#include "pema/harness/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pema::harness {

std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv_text(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw std::invalid_argument("csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (row[i]) out += format_real(*row[i]);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
    if (table.rows.empty()) throw std::invalid_argument("csv: refusing to write empty table to " + path.string());
    const std::string text = to_csv_text(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        // a single-column row holding a missing value is an empty line
        if (line.empty() && (first || table.header.size() != 1)) continue;
        const auto fields = split(line);
        if (first) {
            for (auto f : fields) table.header.emplace_back(f);
            first = false;
            continue;
        }
        if (fields.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "csv: line " << line_no << " has " << fields.size() << " fields, expected " << table.header.size();
            throw std::invalid_argument(msg.str());
        }
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (auto f : fields) {
            if (f.empty()) {
                row.emplace_back(std::nullopt);
                continue;
            }
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
                std::ostringstream msg;
                msg << "csv: line " << line_no << ": cannot parse '" << f << "'";
                throw std::invalid_argument(msg.str());
            }
            row.emplace_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

}  // namespace pema::harness
