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

#ifndef DPSYNTH_METRICS_H_
#define DPSYNTH_METRICS_H_

#include <cstdint>
#include <span>
#include <vector>

namespace dpsynth::eval {

// AUROC as the exact ratio twice_wins_plus_ties / twice_pairs, where a
// positive scored above a negative counts 2 and a tie counts 1.
struct AurocCounts {
  std::int64_t twice_wins_plus_ties = 0;
  std::int64_t twice_pairs = 0;
  double value() const {
    return static_cast<double>(twice_wins_plus_ties) /
           static_cast<double>(twice_pairs);
  }
};

// Mann-Whitney statistic from tie-grouped ranks. Labels must be 0 or 1 and
// both classes present, otherwise DataError.
AurocCounts AurocRational(std::span<const double> scores,
                          std::span<const int> labels);
double Auroc(std::span<const double> scores, std::span<const int> labels);

// Row indices from highest to lowest score. Rows are first shuffled by a
// permutation keyed on `seed` and then stably sorted, so tied scores land in
// a seeded, reproducible order.
std::vector<std::size_t> RankForPrecision(std::span<const double> scores,
                                          std::uint64_t seed);

// Non-interpolated average precision: mean of precision@r over the ranks r
// that hold a positive. DataError without positives.
double AveragePrecision(std::span<const double> scores,
                        std::span<const int> labels, std::uint64_t seed);

}  // namespace dpsynth::eval

#endif  // DPSYNTH_METRICS_H_
