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

#ifndef DPSYNTH_ENCODING_H_
#define DPSYNTH_ENCODING_H_

#include <memory>
#include <vector>

#include "dpsynth/csv.h"
#include "dpsynth/matrix.h"
#include "dpsynth/schema.h"

namespace dpsynth::tabular {

enum class Provenance { kReal, kSynthetic };

// Numeric encoding of a table. Continuous columns are min-max scaled to
// [0,1], categorical columns one-hot, binary columns {0,1} (the target is
// encoded like any other column). Immutable after construction.
class EncodedMatrix {
 public:
  EncodedMatrix(Matrix values, std::shared_ptr<const TableSchema> schema,
                Provenance provenance);

  const Matrix& values() const { return values_; }
  const TableSchema& schema() const { return *schema_; }
  const std::shared_ptr<const TableSchema>& schema_ptr() const {
    return schema_;
  }
  Provenance provenance() const { return provenance_; }
  std::size_t rows() const { return values_.rows(); }
  std::size_t width() const { return values_.cols(); }

 private:
  Matrix values_;
  std::shared_ptr<const TableSchema> schema_;
  Provenance provenance_;
};

// Encodes a cleaned table whose header contains every schema column.
// Continuous values outside the schema bounds are clamped; unseen categories
// are a DataError naming the line.
EncodedMatrix Encode(const CsvTable& table,
                     std::shared_ptr<const TableSchema> schema,
                     Provenance provenance = Provenance::kReal);

struct DecodeStats {
  // One-hot groups with no positive entry, decoded to category 0.
  std::size_t degenerate_onehot = 0;
};

// Continuous: min + x * (max - min); one-hot group: argmax (first index on
// ties); binary: raw value 1 iff x > 0.5.
std::vector<Row> Decode(const Matrix& values, const TableSchema& schema,
                        DecodeStats* stats = nullptr);

Row SchemaHeader(const TableSchema& schema);

// Downstream view: target as labels (1 = positive class), remaining columns
// as features.
std::vector<int> TargetLabels(const Matrix& values, const TableSchema& schema);
Matrix FeaturesWithoutTarget(const Matrix& values, const TableSchema& schema);

}  // namespace dpsynth::tabular

#endif  // DPSYNTH_ENCODING_H_
