// Copyright 2026 The dpsynth Authors
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

#include "dpsynth/schema.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "dpsynth/error.h"

namespace dpsynth::tabular {

std::string_view ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kContinuous:
      return "continuous";
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kBinary:
      return "binary";
  }
  return "unknown";
}

ColumnKind ParseColumnKind(std::string_view name) {
  if (name == "continuous") return ColumnKind::kContinuous;
  if (name == "categorical") return ColumnKind::kCategorical;
  if (name == "binary") return ColumnKind::kBinary;
  throw ConfigError("unknown column kind '" + std::string(name) + "'");
}

std::pair<std::string, ColumnKind> ParseOverride(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos || colon == 0 ||
      colon + 1 == spec.size()) {
    throw ConfigError("override must look like kind:column, got '" +
                      std::string(spec) + "'");
  }
  return {std::string(spec.substr(colon + 1)),
          ParseColumnKind(spec.substr(0, colon))};
}

std::optional<double> ParseNumber(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

// Numeric values sort numerically, otherwise lexicographically.
std::vector<std::string> SortedValues(const std::set<std::string>& values) {
  std::vector<std::string> out(values.begin(), values.end());
  const bool numeric = std::all_of(out.begin(), out.end(), [](const auto& v) {
    return ParseNumber(v).has_value();
  });
  if (numeric) {
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return *ParseNumber(a) < *ParseNumber(b);
    });
  }
  return out;
}

}  // namespace

bool IsMissing(std::string_view cell) {
  const std::string t = Trim(cell);
  return t.empty() || t == "?";
}

CsvTable CleanTable(const CsvTable& table, CleanReport* report) {
  CsvTable out;
  for (const auto& h : table.header) out.header.push_back(Trim(h));
  std::size_t dropped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const Row& row = table.rows[r];
    if (std::any_of(row.begin(), row.end(), IsMissing)) {
      ++dropped;
      continue;
    }
    Row trimmed;
    trimmed.reserve(row.size());
    for (const auto& c : row) trimmed.push_back(Trim(c));
    out.rows.push_back(std::move(trimmed));
    out.lines.push_back(r < table.lines.size() ? table.lines[r] : r + 2);
  }
  if (report != nullptr) report->dropped_rows = dropped;
  return out;
}

std::size_t TableSchema::EncodedWidth() const {
  std::size_t w = 0;
  for (const auto& c : columns) w += c.width();
  return w;
}

std::size_t TableSchema::Offset(std::size_t column) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < column; ++i) off += columns[i].width();
  return off;
}

std::size_t TableSchema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw DataError("schema has no column '" + std::string(name) + "'");
}

double TableSchema::PositiveCode() const {
  const ColumnSpec& t = columns[TargetIndex()];
  if (t.kind != ColumnKind::kBinary) {
    throw DataError("target '" + target + "' is not a binary column");
  }
  if (positive_class == t.categories[0]) return 0.0;
  if (positive_class == t.categories[1]) return 1.0;
  throw DataError("positive class '" + positive_class +
                  "' is not a value of target '" + target + "'");
}

TableSchema TableSchema::WithSwappedPositive() const {
  TableSchema out = *this;
  const ColumnSpec& t = columns[TargetIndex()];
  out.positive_class =
      PositiveCode() == 1.0 ? t.categories[0] : t.categories[1];
  return out;
}

void TableSchema::Validate() const {
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (!names.insert(c.name).second) {
      throw DataError("duplicate column name '" + c.name + "'");
    }
    switch (c.kind) {
      case ColumnKind::kContinuous:
        if (!(c.min < c.max)) {
          throw DataError("continuous column '" + c.name +
                          "' needs min < max (constant column?)");
        }
        break;
      case ColumnKind::kCategorical: {
        const std::set<std::string> uniq(c.categories.begin(),
                                         c.categories.end());
        if (uniq.size() != c.categories.size() || c.categories.size() < 3) {
          throw DataError("categorical column '" + c.name +
                          "' needs >= 3 unique categories");
        }
        break;
      }
      case ColumnKind::kBinary:
        if (c.categories.size() != 2 || c.categories[0] == c.categories[1]) {
          throw DataError("binary column '" + c.name +
                          "' needs exactly two distinct values");
        }
        break;
    }
  }
  PositiveCode();
}

nlohmann::json TableSchema::ToJson() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) {
    nlohmann::json jc = {{"name", c.name}, {"kind", ColumnKindName(c.kind)}};
    if (c.kind == ColumnKind::kContinuous) {
      jc["min"] = c.min;
      jc["max"] = c.max;
    } else if (c.kind == ColumnKind::kCategorical) {
      jc["categories"] = c.categories;
    } else {
      jc["values"] = c.categories;
    }
    cols.push_back(std::move(jc));
  }
  return {{"format", "dpsynth-schema"},
          {"version", 1},
          {"target", target},
          {"positive_class", positive_class},
          {"encoded_width", EncodedWidth()},
          {"columns", std::move(cols)}};
}

TableSchema TableSchema::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "dpsynth-schema") {
      throw DataError("not a dpsynth schema document");
    }
    TableSchema s;
    s.target = j.at("target").get<std::string>();
    s.positive_class = j.at("positive_class").get<std::string>();
    for (const auto& jc : j.at("columns")) {
      ColumnSpec c;
      c.name = jc.at("name").get<std::string>();
      c.kind = ParseColumnKind(jc.at("kind").get<std::string>());
      if (c.kind == ColumnKind::kContinuous) {
        c.min = jc.at("min").get<double>();
        c.max = jc.at("max").get<double>();
      } else if (c.kind == ColumnKind::kCategorical) {
        c.categories = jc.at("categories").get<std::vector<std::string>>();
      } else {
        c.categories = jc.at("values").get<std::vector<std::string>>();
      }
      s.columns.push_back(std::move(c));
    }
    s.Validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed schema JSON: ") + e.what());
  }
}

TableSchema InferSchema(const CsvTable& table, const SchemaOptions& options) {
  if (table.rows.empty()) throw DataError("no data rows after cleaning");
  for (const auto& [name, kind] : options.overrides) {
    if (std::find(table.header.begin(), table.header.end(), name) ==
        table.header.end()) {
      throw ConfigError("override names unknown column '" + name + "'");
    }
  }
  TableSchema schema;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    ColumnSpec spec;
    spec.name = table.header[c];
    std::set<std::string> distinct;
    bool all_numeric = true;
    bool all_integer = true;
    std::size_t first_bad_row = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& cell = table.rows[r][c];
      distinct.insert(cell);
      const auto v = ParseNumber(cell);
      if (!v) {
        if (all_numeric) first_bad_row = r;
        all_numeric = false;
        all_integer = false;
      } else if (std::floor(*v) != *v) {
        all_integer = false;
      }
    }
    auto line_of = [&](std::size_t r) {
      return r < table.lines.size() ? table.lines[r] : r + 2;
    };
    if (distinct.size() < 2) {
      throw DataError("column '" + spec.name + "' is constant");
    }
    const auto forced = options.overrides.find(spec.name);
    ColumnKind kind;
    if (forced != options.overrides.end()) {
      kind = forced->second;
    } else if (distinct.size() == 2) {
      kind = ColumnKind::kBinary;
    } else if (distinct.size() <= options.max_categories &&
               (!all_numeric || all_integer)) {
      kind = ColumnKind::kCategorical;
    } else if (all_numeric) {
      kind = ColumnKind::kContinuous;
    } else {
      throw DataError("column '" + spec.name + "' has " +
                      std::to_string(distinct.size()) +
                      " distinct non-numeric values (limit " +
                      std::to_string(options.max_categories) +
                      "); force a kind to accept it");
    }
    spec.kind = kind;
    switch (kind) {
      case ColumnKind::kContinuous: {
        if (!all_numeric) {
          throw DataError("line " + std::to_string(line_of(first_bad_row)) +
                          ", column '" + spec.name + "': cannot parse '" +
                          table.rows[first_bad_row][c] + "' as a number");
        }
        spec.min = INFINITY;
        spec.max = -INFINITY;
        for (const auto& row : table.rows) {
          const double v = *ParseNumber(row[c]);
          spec.min = std::min(spec.min, v);
          spec.max = std::max(spec.max, v);
        }
        break;
      }
      case ColumnKind::kCategorical:
        if (distinct.size() < 3) {
          throw DataError("column '" + spec.name +
                          "' forced categorical but has only " +
                          std::to_string(distinct.size()) + " values");
        }
        spec.categories = SortedValues(distinct);
        break;
      case ColumnKind::kBinary:
        if (distinct.size() != 2) {
          throw DataError("column '" + spec.name +
                          "' forced binary but has " +
                          std::to_string(distinct.size()) + " values");
        }
        spec.categories = SortedValues(distinct);
        break;
    }
    schema.columns.push_back(std::move(spec));
  }

  schema.target = options.target.value_or(table.header.back());
  const std::size_t ti = schema.IndexOf(schema.target);
  const ColumnSpec& tc = schema.columns[ti];
  if (tc.kind != ColumnKind::kBinary) {
    throw DataError("target column '" + schema.target + "' must be binary, got " +
                    std::string(ColumnKindName(tc.kind)));
  }
  if (options.positive_class) {
    schema.positive_class = *options.positive_class;
  } else {
    std::size_t count1 = 0;
    for (const auto& row : table.rows) count1 += row[ti] == tc.categories[1];
    const std::size_t count0 = table.rows.size() - count1;
    // Minority value is positive; ties go to the second value.
    schema.positive_class =
        count0 < count1 ? tc.categories[0] : tc.categories[1];
  }
  schema.Validate();
  return schema;
}

}  // namespace dpsynth::tabular
