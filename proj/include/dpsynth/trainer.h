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

#ifndef DPSYNTH_TRAINER_H_
#define DPSYNTH_TRAINER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/accountant.h"
#include "dpsynth/encoding.h"
#include "dpsynth/generator.h"
#include "dpsynth/optim.h"
#include "dpsynth/student.h"
#include "dpsynth/teacher.h"
#include "json.hpp"

namespace dpsynth::trainer {

struct TrainConfig {
  int k = 10;
  double sigma = 1.0;
  std::size_t batch = 64;
  int student_steps = 5;
  double epsilon_target = 4.0;
  double delta = 1e-5;
  std::int64_t max_outer_iterations = 2000;
  std::uint64_t seed = 0;
  models::StudentKind student_kind = models::StudentKind::kTransformer;
  bool rdp_clamp = true;
  bool teacher_warm_start = false;
  // 0 means all available cores. Results do not depend on this value.
  std::size_t threads = 0;
  ad::AdamConfig generator_adam;
  ad::AdamConfig student_adam;
  models::LogRegConfig teacher;
  models::GeneratorConfig generator;

  // Throws ConfigError naming the first violated invariant.
  void Validate() const;
  nlohmann::json ToJson() const;
  // Starts from `base` and overrides the members present in `j`. Unknown
  // keys are a ConfigError.
  static TrainConfig FromJson(const nlohmann::json& j,
                              const TrainConfig& base);
  static TrainConfig FromJson(const nlohmann::json& j);
};

struct IterationTrace {
  std::int64_t iteration = 0;
  double epsilon_hat = 0.0;
  // Mean of |n_j - k/2| over the query batch.
  double mean_gap = 0.0;
  // Fraction of noisy labels equal to 1 ("real").
  double frac_label_real = 0.0;
  // Mean BCE over the student steps of this iteration.
  double student_loss = 0.0;
  double generator_loss = 0.0;
};

inline constexpr const char* kIterationTraceHeader =
    "iteration,epsilon_hat,mean_gap,frac_label_real,student_loss,"
    "generator_loss";
std::string FormatIterationTrace(std::span<const IterationTrace> rows);

// Seen by hooks after each completed outer iteration.
struct IterationView {
  const IterationTrace& trace;
  const models::Generator& generator;
  const models::Student& student;
  const privacy::RdpLedger& ledger;
  std::span<const int> tallies;
};

struct TrainHooks {
  std::function<void(const IterationView&)> on_iteration;
};

struct TrainResult {
  std::unique_ptr<models::Generator> generator;
  std::unique_ptr<models::Student> student;
  privacy::Epsilon epsilon;
  // Converted epsilon of the empty ledger.
  double epsilon_floor = 0.0;
  std::vector<IterationTrace> trace;
  std::vector<privacy::TraceRow> accountant_trace;
  // False when the loop stopped at max_outer_iterations.
  bool budget_reached = false;
  std::int64_t iterations = 0;
};

// Runs the teacher/student/generator loop on real encoded data until the
// converted epsilon reaches the target or the iteration cap is hit. Real rows
// reach the generator and student only through teacher vote tallies.
TrainResult Train(const tabular::EncodedMatrix& data, const TrainConfig& config,
                  const TrainHooks& hooks = {});

// n steps of BCE(S(x_q), labels) on a fixed query batch. Returns the loss
// before each step.
std::vector<double> StudentUpdate(models::Student& student, ad::Adam& optimizer,
                                  const Matrix& x_q,
                                  std::span<const int> labels, int steps,
                                  std::int64_t iteration = 0);

// One step of BCE(S(G(z)), 1) on a fresh latent batch with the student
// frozen. Returns the loss.
double GeneratorUpdate(models::Generator& generator, models::Student& student,
                       ad::Adam& optimizer, std::size_t batch, Rng& latent_rng,
                       Rng& gumbel_rng, std::int64_t iteration = 0);

}  // namespace dpsynth::trainer

#endif  // DPSYNTH_TRAINER_H_
