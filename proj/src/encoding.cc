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

#include "dpsynth/encoding.h"

#include <algorithm>

#include "dpsynth/error.h"

namespace dpsynth::tabular {

EncodedMatrix::EncodedMatrix(Matrix values,
                             std::shared_ptr<const TableSchema> schema,
                             Provenance provenance)
    : values_(std::move(values)),
      schema_(std::move(schema)),
      provenance_(provenance) {
  if (schema_ == nullptr) throw DataError("encoded matrix needs a schema");
  if (values_.cols() != schema_->EncodedWidth()) {
    throw DataError("encoded width " + std::to_string(values_.cols()) +
                    " does not match schema width " +
                    std::to_string(schema_->EncodedWidth()));
  }
}

Row SchemaHeader(const TableSchema& schema) {
  Row header;
  for (const auto& c : schema.columns) header.push_back(c.name);
  return header;
}

EncodedMatrix Encode(const CsvTable& table,
                     std::shared_ptr<const TableSchema> schema,
                     Provenance provenance) {
  const TableSchema& s = *schema;
  std::vector<std::size_t> source(s.columns.size());
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    const auto it =
        std::find(table.header.begin(), table.header.end(), s.columns[c].name);
    if (it == table.header.end()) {
      throw DataError("input is missing column '" + s.columns[c].name + "'");
    }
    source[c] = static_cast<std::size_t>(it - table.header.begin());
  }
  Matrix values(table.rows.size(), s.EncodedWidth());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto line = [&] {
      return "line " +
             std::to_string(r < table.lines.size() ? table.lines[r] : r + 2);
    };
    std::size_t off = 0;
    for (std::size_t c = 0; c < s.columns.size(); ++c) {
      const ColumnSpec& spec = s.columns[c];
      const std::string& cell = table.rows[r][source[c]];
      switch (spec.kind) {
        case ColumnKind::kContinuous: {
          const auto v = ParseNumber(cell);
          if (!v) {
            throw DataError(line() + ", column '" + spec.name +
                            "': cannot parse '" + cell + "' as a number");
          }
          values(r, off) =
              std::clamp((*v - spec.min) / (spec.max - spec.min), 0.0, 1.0);
          break;
        }
        case ColumnKind::kCategorical:
        case ColumnKind::kBinary: {
          const auto it =
              std::find(spec.categories.begin(), spec.categories.end(), cell);
          if (it == spec.categories.end()) {
            throw DataError(line() + ", column '" + spec.name +
                            "': unseen category '" + cell + "'");
          }
          const auto idx =
              static_cast<std::size_t>(it - spec.categories.begin());
          if (spec.kind == ColumnKind::kCategorical) {
            values(r, off + idx) = 1.0;
          } else {
            values(r, off) = static_cast<double>(idx);
          }
          break;
        }
      }
      off += spec.width();
    }
  }
  return EncodedMatrix(std::move(values), std::move(schema), provenance);
}

std::vector<Row> Decode(const Matrix& values, const TableSchema& schema,
                        DecodeStats* stats) {
  if (values.cols() != schema.EncodedWidth()) {
    throw DataError("decode: width " + std::to_string(values.cols()) +
                    " does not match schema width " +
                    std::to_string(schema.EncodedWidth()));
  }
  std::vector<Row> rows;
  rows.reserve(values.rows());
  std::size_t degenerate = 0;
  for (std::size_t r = 0; r < values.rows(); ++r) {
    Row row;
    std::size_t off = 0;
    for (const auto& spec : schema.columns) {
      switch (spec.kind) {
        case ColumnKind::kContinuous:
          row.push_back(
              FormatNumber(spec.min + values(r, off) * (spec.max - spec.min)));
          break;
        case ColumnKind::kCategorical: {
          std::size_t best = 0;
          bool any_positive = false;
          for (std::size_t i = 0; i < spec.categories.size(); ++i) {
            any_positive = any_positive || values(r, off + i) > 0.0;
            if (values(r, off + i) > values(r, off + best)) best = i;
          }
          if (!any_positive) {
            best = 0;
            ++degenerate;
          }
          row.push_back(spec.categories[best]);
          break;
        }
        case ColumnKind::kBinary:
          row.push_back(spec.categories[values(r, off) > 0.5 ? 1 : 0]);
          break;
      }
      off += spec.width();
    }
    rows.push_back(std::move(row));
  }
  if (stats != nullptr) stats->degenerate_onehot += degenerate;
  return rows;
}

std::vector<int> TargetLabels(const Matrix& values, const TableSchema& schema) {
  const std::size_t off = schema.Offset(schema.TargetIndex());
  const bool positive_is_one = schema.PositiveCode() == 1.0;
  std::vector<int> labels(values.rows());
  for (std::size_t r = 0; r < values.rows(); ++r) {
    const bool one = values(r, off) > 0.5;
    labels[r] = one == positive_is_one ? 1 : 0;
  }
  return labels;
}

Matrix FeaturesWithoutTarget(const Matrix& values, const TableSchema& schema) {
  const std::size_t off = schema.Offset(schema.TargetIndex());
  Matrix out(values.rows(), values.cols() - 1);
  for (std::size_t r = 0; r < values.rows(); ++r) {
    std::size_t o = 0;
    for (std::size_t c = 0; c < values.cols(); ++c) {
      if (c == off) continue;
      out(r, o++) = values(r, c);
    }
  }
  return out;
}

}  // namespace dpsynth::tabular
