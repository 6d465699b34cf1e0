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

#ifndef DPSYNTH_TEACHER_H_
#define DPSYNTH_TEACHER_H_

#include <span>
#include <vector>

#include "dpsynth/encoding.h"
#include "dpsynth/matrix.h"
#include "dpsynth/shards.h"

namespace dpsynth::models {

struct LogRegConfig {
  double l2 = 1e-3;
  int iterations = 200;
  double lr = 0.5;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  double Logit(std::span<const double> x) const;
};

struct LogRegFit {
  // In the caller's feature space.
  LinearModel raw;
  // In the standardized space used during fitting (for warm starts).
  LinearModel standardized;
};

// Full-batch gradient descent on mean BCE + l2/2 * |w|^2 over features
// standardized within the fit (zero-variance columns are left unscaled). The
// standardization is folded back into the returned raw model. Deterministic.
LogRegFit FitLogisticRegression(const Matrix& x, std::span<const double> y,
                                const LogRegConfig& config,
                                const LinearModel* warm_start = nullptr);

// Shard-local real-vs-fake classifier.
class Teacher {
 public:
  Teacher(LinearModel model, std::size_t shard_id,
          LinearModel standardized = {});

  // Fits on one real shard (label 1) against a same-sized synthetic shard
  // (label 0). With warm_start the previous standardized weights seed the
  // descent; otherwise the fit starts from zero.
  static Teacher Fit(const tabular::ShardView& real,
                     const tabular::EncodedMatrix& fake,
                     const LogRegConfig& config,
                     const Teacher* warm_start = nullptr);

  // 1 iff w.x + b > 0 (sigmoid strictly above 0.5).
  int Vote(std::span<const double> row) const;
  double Score(std::span<const double> row) const;

  const LinearModel& model() const { return model_; }
  std::size_t shard_id() const { return shard_id_; }

 private:
  LinearModel model_;
  LinearModel standardized_;
  std::size_t shard_id_;
};

// n_j = number of teachers voting "real" for each query row.
std::vector<int> TallyVotes(std::span<const Teacher> teachers,
                            const Matrix& queries);

}  // namespace dpsynth::models

#endif  // DPSYNTH_TEACHER_H_
