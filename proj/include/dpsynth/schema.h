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

#ifndef DPSYNTH_SCHEMA_H_
#define DPSYNTH_SCHEMA_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpsynth/csv.h"
#include "json.hpp"

namespace dpsynth::tabular {

enum class ColumnKind { kContinuous, kCategorical, kBinary };

std::string_view ColumnKindName(ColumnKind kind);
ColumnKind ParseColumnKind(std::string_view name);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  // Continuous: observed bounds, min < max.
  double min = 0.0;
  double max = 0.0;
  // Categorical: ordered categories (>= 3). Binary: exactly two raw values,
  // categories[0] encodes as 0 and categories[1] as 1.
  std::vector<std::string> categories;

  // Number of encoded columns this column occupies.
  std::size_t width() const {
    return kind == ColumnKind::kCategorical ? categories.size() : 1;
  }
};

struct TableSchema {
  std::vector<ColumnSpec> columns;
  std::string target;
  std::string positive_class;

  std::size_t EncodedWidth() const;
  // Offset of column i in the encoded row.
  std::size_t Offset(std::size_t column) const;
  std::size_t IndexOf(std::string_view name) const;
  std::size_t TargetIndex() const { return IndexOf(target); }
  // Encoded value (0 or 1) that represents positive_class in the target.
  double PositiveCode() const;
  // Copy with the target's positive class set to the other value.
  TableSchema WithSwappedPositive() const;
  // Throws DataError when an invariant is violated.
  void Validate() const;

  nlohmann::json ToJson() const;
  static TableSchema FromJson(const nlohmann::json& j);

  friend bool operator==(const TableSchema& a, const TableSchema& b) {
    return a.ToJson() == b.ToJson();
  }
};

struct SchemaOptions {
  // Forced kinds by column name.
  std::map<std::string, ColumnKind> overrides;
  // Defaults to the last column.
  std::optional<std::string> target;
  // Defaults to the minority value of the target.
  std::optional<std::string> positive_class;
  std::size_t max_categories = 20;
};

// Parses "kind:column" (e.g. "categorical:education").
std::pair<std::string, ColumnKind> ParseOverride(std::string_view spec);

// Cells that count as missing after whitespace trimming.
bool IsMissing(std::string_view cell);

struct CleanReport {
  std::size_t dropped_rows = 0;
};

// Trims cells and drops rows with any missing cell.
CsvTable CleanTable(const CsvTable& table, CleanReport* report = nullptr);

// Kind inference on a cleaned table:
//   exactly 2 distinct values                      -> binary
//   <= max_categories distinct non-numeric values,
//   or <= max_categories distinct integer values   -> categorical
//   otherwise numeric-parseable                    -> continuous
//   otherwise                                      -> DataError
TableSchema InferSchema(const CsvTable& table, const SchemaOptions& options);

std::optional<double> ParseNumber(std::string_view s);
// Shortest round-trip decimal form.
std::string FormatNumber(double v);

}  // namespace dpsynth::tabular

#endif  // DPSYNTH_SCHEMA_H_
