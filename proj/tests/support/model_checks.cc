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

#include "support/model_checks.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dpsynth/autodiff.h"
#include "dpsynth/rng.h"
#include "dpsynth/shards.h"

namespace dpsynth::testing {

namespace {

double Loss(models::Generator& generator, models::Student& student,
            const Matrix& z, std::uint64_t gumbel_seed, bool trainable,
            ad::Tape& t) {
  Rng gumbel = MakeRng(gumbel_seed);
  ad::Var x = generator.Forward(t, z, models::GenMode::kTrain, gumbel,
                                trainable);
  ad::Var loss = ad::BceWithLogits(t, student.Logits(t, x, false),
                                   Matrix(z.rows(), 1, 1.0));
  if (trainable) t.Backward(loss);
  return t.value(loss)(0, 0);
}

}  // namespace

double GeneratorStudentGradError(models::Generator& generator,
                                 models::Student& student, const Matrix& z,
                                 std::uint64_t gumbel_seed,
                                 std::size_t per_tensor, double eps) {
  ad::ParamStore& ps = generator.params();
  ps.ZeroGrad();
  {
    ad::Tape t;
    Loss(generator, student, z, gumbel_seed, true, t);
  }
  auto loss = [&] {
    ad::Tape t;
    return Loss(generator, student, z, gumbel_seed, false, t);
  };
  Rng pick = MakeRng(gumbel_seed + 1);
  double worst = 0.0;
  for (std::size_t id = 0; id < ps.size(); ++id) {
    if (!ps[id].trainable) continue;
    Matrix& v = ps[id].value;
    for (std::size_t k = 0; k < per_tensor; ++k) {
      const std::size_t i =
          std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(pick);
      const double orig = v[i];
      v[i] = orig + eps;
      const double up = loss();
      v[i] = orig - eps;
      const double down = loss();
      v[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      worst = std::max(worst, std::fabs(ps[id].grad[i] - numeric) /
                                  std::max(1.0, std::fabs(numeric)));
    }
  }
  return worst;
}

tabular::EncodedMatrix PermuteWithinShards(const tabular::EncodedMatrix& data,
                                           std::size_t k, std::uint64_t seed) {
  Rng partition_rng = MakeRng(seed, Stream::kPartition);
  const tabular::ShardSet shards =
      tabular::PartitionShards(data.rows(), k, partition_rng);
  Matrix out = data.values();
  for (const auto& shard : shards.shards) {
    for (std::size_t j = 0; j < shard.size(); ++j) {
      const std::size_t from = shard[(j + 1) % shard.size()];
      std::copy(data.values().row(from).begin(),
                data.values().row(from).end(), out.row(shard[j]).begin());
    }
  }
  return tabular::EncodedMatrix(std::move(out), data.schema_ptr(),
                                tabular::Provenance::kReal);
}

}  // namespace dpsynth::testing
