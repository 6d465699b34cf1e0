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

#include "dpsynth/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpsynth/error.h"
#include "dpsynth/rng.h"

namespace dpsynth::eval {
namespace {

void CheckInputs(std::span<const double> scores, std::span<const int> labels,
                 const char* metric) {
  if (scores.size() != labels.size()) {
    throw DataError(std::string(metric) + ": " + std::to_string(scores.size()) +
                    " scores but " + std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError(std::string(metric) + ": labels must be 0 or 1");
    }
    if (std::isnan(scores[i])) {
      throw DataError(std::string(metric) + ": NaN score at index " +
                      std::to_string(i));
    }
  }
}

}  // namespace

AurocCounts AurocRational(std::span<const double> scores,
                          std::span<const int> labels) {
  CheckInputs(scores, labels, "auroc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::int64_t pos = 0, neg = 0, twice = 0;
  // Walk groups of equal score in ascending order; `neg` counts negatives
  // strictly below the current group.
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t group_pos = 0, group_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? group_pos : group_neg) += 1;
      ++j;
    }
    twice += group_pos * (2 * neg + group_neg);
    pos += group_pos;
    neg += group_neg;
    i = j;
  }
  if (pos == 0 || neg == 0) {
    throw DataError("auroc is undefined unless both classes are present");
  }
  return {twice, 2 * pos * neg};
}

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  return AurocRational(scores, labels).value();
}

std::vector<std::size_t> RankForPrecision(std::span<const double> scores,
                                          std::uint64_t seed) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with explicit draws so the permutation does not depend on
  // the standard library's shuffle.
  Rng rng = MakeRng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

double AveragePrecision(std::span<const double> scores,
                        std::span<const int> labels, std::uint64_t seed) {
  CheckInputs(scores, labels, "average precision");
  const std::vector<std::size_t> order = RankForPrecision(scores, seed);
  double sum = 0.0;
  std::int64_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) {
    throw DataError("average precision is undefined without positives");
  }
  return sum / static_cast<double>(hits);
}

}  // namespace dpsynth::eval
