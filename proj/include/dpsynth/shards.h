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

#ifndef DPSYNTH_SHARDS_H_
#define DPSYNTH_SHARDS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/csv.h"
#include "dpsynth/encoding.h"
#include "dpsynth/rng.h"

namespace dpsynth::tabular {

// k pairwise-disjoint index lists covering 0..n-1; sizes differ by at most 1.
struct ShardSet {
  std::vector<std::vector<std::size_t>> shards;

  std::size_t size() const { return shards.size(); }
};

// Random permutation split into k near-equal shards; the first n % k shards
// hold one extra row.
ShardSet PartitionShards(std::size_t n_rows, std::size_t k, Rng& rng);

class ShardedData;

// Read-only view of exactly one shard of the real data. Only ShardedData can
// create one, so a consumer cannot assemble rows from two shards.
class ShardView {
 public:
  std::size_t index() const { return index_; }
  std::size_t rows() const { return indices_.size(); }
  // Materializes the shard's encoded rows.
  Matrix Rows() const;

 private:
  friend class ShardedData;
  ShardView(const EncodedMatrix& parent, std::span<const std::size_t> indices,
            std::size_t index)
      : parent_(&parent), indices_(indices), index_(index) {}

  const EncodedMatrix* parent_;
  std::span<const std::size_t> indices_;
  std::size_t index_;
};

// Real data together with its teacher partition. Must not outlive `data`.
class ShardedData {
 public:
  ShardedData(const EncodedMatrix& data, ShardSet shards);

  std::size_t size() const { return shards_.size(); }
  ShardView shard(std::size_t i) const;
  const ShardSet& shard_set() const { return shards_; }

 private:
  const EncodedMatrix* data_;
  ShardSet shards_;
};

struct TableSplit {
  CsvTable train;
  CsvTable test;
};

// Stratified by the target column: each class is shuffled and split so the
// test set holds round(test_fraction * class size) of its rows.
TableSplit StratifiedSplit(const CsvTable& table, const std::string& target,
                           double test_fraction, std::uint64_t seed);

}  // namespace dpsynth::tabular

#endif  // DPSYNTH_SHARDS_H_
