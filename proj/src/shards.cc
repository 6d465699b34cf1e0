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

#include "dpsynth/shards.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dpsynth/error.h"

namespace dpsynth::tabular {

ShardSet PartitionShards(std::size_t n_rows, std::size_t k, Rng& rng) {
  if (k < 1) throw ConfigError("shard count k must be >= 1");
  if (k > n_rows) {
    throw ConfigError("shard count k=" + std::to_string(k) +
                      " exceeds row count " + std::to_string(n_rows));
  }
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ShardSet set;
  set.shards.resize(k);
  const std::size_t base = n_rows / k, extra = n_rows % k;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    set.shards[i].assign(perm.begin() + pos, perm.begin() + pos + len);
    pos += len;
  }
  return set;
}

Matrix ShardView::Rows() const { return parent_->values().SelectRows(indices_); }

ShardedData::ShardedData(const EncodedMatrix& data, ShardSet shards)
    : data_(&data), shards_(std::move(shards)) {
  std::vector<char> seen(data.rows(), 0);
  std::size_t total = 0;
  for (const auto& s : shards_.shards) {
    for (std::size_t idx : s) {
      if (idx >= data.rows() || seen[idx]) {
        throw DataError("shard set is not a partition of the data rows");
      }
      seen[idx] = 1;
      ++total;
    }
  }
  if (total != data.rows()) {
    throw DataError("shard set does not cover every data row");
  }
}

ShardView ShardedData::shard(std::size_t i) const {
  if (i >= shards_.size()) throw DataError("shard index out of range");
  return ShardView(*data_, shards_.shards[i], i);
}

TableSplit StratifiedSplit(const CsvTable& table, const std::string& target,
                           double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  const auto it = std::find(table.header.begin(), table.header.end(), target);
  if (it == table.header.end()) {
    throw DataError("split: no target column '" + target + "'");
  }
  const auto ti = static_cast<std::size_t>(it - table.header.begin());
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    by_class[table.rows[r][ti]].push_back(r);
  }
  Rng rng = MakeRng(seed);
  std::vector<char> is_test(table.rows.size(), 0);
  for (auto& [value, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(rows.size())));
    for (std::size_t i = 0; i < n_test; ++i) is_test[rows[i]] = 1;
  }
  TableSplit split;
  split.train.header = split.test.header = table.header;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    CsvTable& dst = is_test[r] ? split.test : split.train;
    dst.rows.push_back(table.rows[r]);
    dst.lines.push_back(r < table.lines.size() ? table.lines[r] : r + 2);
  }
  return split;
}

}  // namespace dpsynth::tabular
