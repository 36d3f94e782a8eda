// Copyright 2026 The Deid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal RFC-4180-ish CSV reading used by the ingestion paths.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "deid/error.hpp"

namespace deid::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column positions for `names`, in order. Throws kValidation naming the
  /// first missing column.
  std::vector<std::size_t> require(const std::vector<std::string>& names) const {
    std::vector<std::size_t> out;
    for (const auto& name : names) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw Error(ErrorCode::kValidation, "missing required column '" + name + "'");
      }
      out.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    return out;
  }
};

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    auto first = f.find_first_not_of(" \t");
    auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
  }
  return fields;
}

/// Reads a header line plus data rows. Blank lines are skipped; every data
/// row must have as many fields as the header.
inline Table read(std::istream& in) {
  Table table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::kValidation,
                  "line " + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back({lineno, std::move(fields)});
  }
  if (!have_header) throw Error(ErrorCode::kValidation, "empty CSV input (no header)");
  return table;
}

inline std::string where(const Row& row) { return "line " + std::to_string(row.line); }

inline std::int64_t parse_int(const Row& row, std::string_view field, std::string_view column) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kValidation, where(row) + ": column '" + std::string(column) +
                                            "' is not an integer: '" + std::string(field) + "'");
  }
  return value;
}

inline double parse_double(const Row& row, std::string_view field, std::string_view column) {
  std::string buf(field);
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(buf, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (buf.empty() || used != buf.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kValidation, where(row) + ": column '" + std::string(column) +
                                            "' is not a number: '" + buf + "'");
  }
  return value;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace deid::csv
