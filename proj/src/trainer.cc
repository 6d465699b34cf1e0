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

#include "dpsynth/trainer.h"

#include <cmath>
#include <optional>
#include <cstdio>
#include <set>
#include <sstream>

#include "dpsynth/error.h"
#include "dpsynth/parallel.h"
#include "dpsynth/shards.h"

namespace dpsynth::trainer {
namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& j, const std::set<std::string>& known,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

json AdamToJson(const ad::AdamConfig& c) {
  return {{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}};
}

ad::AdamConfig AdamFromJson(const json& j, ad::AdamConfig c,
                            const std::string& where) {
  RejectUnknownKeys(j, {"lr", "beta1", "beta2", "eps"}, where);
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  return c;
}

void ValidateAdam(const ad::AdamConfig& c, const std::string& name) {
  if (!(c.lr > 0.0) || !(c.beta1 >= 0.0 && c.beta1 < 1.0) ||
      !(c.beta2 >= 0.0 && c.beta2 < 1.0) || !(c.eps > 0.0)) {
    throw ConfigError(name + ": need lr > 0, beta1 and beta2 in [0, 1), eps > 0");
  }
}

// Each shard's fake rows are a contiguous block of one train-mode batch, in
// shard order.
std::vector<tabular::EncodedMatrix> SliceFakes(
    const tabular::EncodedMatrix& fakes, const tabular::ShardSet& shards) {
  std::vector<tabular::EncodedMatrix> out;
  out.reserve(shards.size());
  std::size_t offset = 0;
  for (const auto& shard : shards.shards) {
    Matrix block(shard.size(), fakes.width());
    for (std::size_t r = 0; r < shard.size(); ++r) {
      auto src = fakes.values().row(offset + r);
      std::copy(src.begin(), src.end(), block.row(r).begin());
    }
    offset += shard.size();
    out.emplace_back(std::move(block), fakes.schema_ptr(),
                     tabular::Provenance::kSynthetic);
  }
  return out;
}

void CheckFinite(double loss, const char* what, std::int64_t iteration) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(what) + " loss is not finite at iteration " +
                       std::to_string(iteration));
  }
}

// Re-raises numeric failures from inside a pass with the iteration attached.
template <typename Fn>
auto WithIterationContext(const char* what, std::int64_t iteration, Fn fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(std::string(what) + " update, iteration " +
                       std::to_string(iteration) + ": " + e.what());
  }
}

}  // namespace

void TrainConfig::Validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("sigma must be finite and > 0");
  }
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (student_steps < 1) throw ConfigError("student steps must be >= 1");
  if (!(epsilon_target > 0.0)) throw ConfigError("epsilon_target must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie in (0, 1)");
  }
  if (max_outer_iterations < 1) {
    throw ConfigError("max_outer_iterations must be >= 1");
  }
  ValidateAdam(generator_adam, "generator_adam");
  ValidateAdam(student_adam, "student_adam");
  if (teacher.iterations < 1 || !(teacher.lr > 0.0) || !(teacher.l2 >= 0.0)) {
    throw ConfigError("teacher: need iterations >= 1, lr > 0, l2 >= 0");
  }
  if (generator.latent_dim == 0 || generator.hidden == 0 ||
      !(generator.train_tau > 0.0) || !(generator.sample_tau > 0.0) ||
      !(generator.bn_momentum >= 0.0 && generator.bn_momentum < 1.0)) {
    throw ConfigError(
        "generator: need positive widths and temperatures, momentum in [0, 1)");
  }
}

json TrainConfig::ToJson() const {
  return {
      {"k", k},
      {"sigma", sigma},
      {"batch", batch},
      {"student_steps", student_steps},
      {"epsilon_target", epsilon_target},
      {"delta", delta},
      {"max_outer_iterations", max_outer_iterations},
      {"seed", seed},
      {"student", models::StudentKindName(student_kind)},
      {"rdp_clamp", rdp_clamp},
      {"teacher_warm_start", teacher_warm_start},
      {"threads", threads},
      {"generator_adam", AdamToJson(generator_adam)},
      {"student_adam", AdamToJson(student_adam)},
      {"teacher",
       {{"l2", teacher.l2}, {"iterations", teacher.iterations},
        {"lr", teacher.lr}}},
      {"generator", generator.ToJson()},
  };
}

TrainConfig TrainConfig::FromJson(const json& j, const TrainConfig& base) {
  RejectUnknownKeys(j,
                    {"k", "sigma", "batch", "student_steps", "epsilon_target",
                     "delta", "max_outer_iterations", "seed", "student",
                     "rdp_clamp", "teacher_warm_start", "threads",
                     "generator_adam", "student_adam", "teacher", "generator"},
                    "training config");
  TrainConfig c = base;
  try {
    c.k = j.value("k", c.k);
    c.sigma = j.value("sigma", c.sigma);
    c.batch = j.value("batch", c.batch);
    c.student_steps = j.value("student_steps", c.student_steps);
    c.epsilon_target = j.value("epsilon_target", c.epsilon_target);
    c.delta = j.value("delta", c.delta);
    c.max_outer_iterations =
        j.value("max_outer_iterations", c.max_outer_iterations);
    c.seed = j.value("seed", c.seed);
    if (j.contains("student")) {
      c.student_kind = models::ParseStudentKind(j.at("student").get<std::string>());
    }
    c.rdp_clamp = j.value("rdp_clamp", c.rdp_clamp);
    c.teacher_warm_start = j.value("teacher_warm_start", c.teacher_warm_start);
    c.threads = j.value("threads", c.threads);
    if (j.contains("generator_adam")) {
      c.generator_adam =
          AdamFromJson(j.at("generator_adam"), c.generator_adam, "generator_adam");
    }
    if (j.contains("student_adam")) {
      c.student_adam =
          AdamFromJson(j.at("student_adam"), c.student_adam, "student_adam");
    }
    if (j.contains("teacher")) {
      const json& t = j.at("teacher");
      RejectUnknownKeys(t, {"l2", "iterations", "lr"}, "teacher");
      c.teacher.l2 = t.value("l2", c.teacher.l2);
      c.teacher.iterations = t.value("iterations", c.teacher.iterations);
      c.teacher.lr = t.value("lr", c.teacher.lr);
    }
    if (j.contains("generator")) {
      const json& g = j.at("generator");
      RejectUnknownKeys(g,
                        {"latent_dim", "hidden", "blocks", "train_tau",
                         "sample_tau", "bn_momentum"},
                        "generator");
      json merged = c.generator.ToJson();
      merged.update(g);
      c.generator = models::GeneratorConfig::FromJson(merged);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  return c;
}

TrainConfig TrainConfig::FromJson(const json& j) {
  return FromJson(j, TrainConfig{});
}

std::string FormatIterationTrace(std::span<const IterationTrace> rows) {
  std::ostringstream out;
  out << kIterationTraceHeader << '\n';
  for (const IterationTrace& r : rows) {
    out << r.iteration << ',' << privacy::FormatExact(r.epsilon_hat) << ','
        << privacy::FormatExact(r.mean_gap) << ','
        << privacy::FormatExact(r.frac_label_real) << ','
        << privacy::FormatExact(r.student_loss) << ','
        << privacy::FormatExact(r.generator_loss) << '\n';
  }
  return out.str();
}

std::vector<double> StudentUpdate(models::Student& student, ad::Adam& optimizer,
                                  const Matrix& x_q,
                                  std::span<const int> labels, int steps,
                                  std::int64_t iteration) {
  if (x_q.rows() != labels.size()) {
    throw DataError("student update: " + std::to_string(x_q.rows()) +
                    " queries but " + std::to_string(labels.size()) + " labels");
  }
  Matrix targets(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) targets(i, 0) = labels[i];
  std::vector<double> losses;
  losses.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    losses.push_back(WithIterationContext("student", iteration, [&] {
      ad::Tape t;
      student.params().ZeroGrad();
      ad::Var loss = ad::BceWithLogits(
          t, student.Logits(t, t.Constant(x_q), true), targets);
      const double value = t.value(loss)(0, 0);
      CheckFinite(value, "student", iteration);
      t.Backward(loss);
      optimizer.Step(student.params());
      return value;
    }));
  }
  return losses;
}

double GeneratorUpdate(models::Generator& generator, models::Student& student,
                       ad::Adam& optimizer, std::size_t batch, Rng& latent_rng,
                       Rng& gumbel_rng, std::int64_t iteration) {
  return WithIterationContext("generator", iteration, [&] {
    ad::Tape t;
    generator.params().ZeroGrad();
    const Matrix z = generator.SampleLatent(batch, latent_rng);
    ad::Var x =
        generator.Forward(t, z, models::GenMode::kTrain, gumbel_rng, true);
    ad::Var loss = ad::BceWithLogits(t, student.Logits(t, x, false),
                                     Matrix(batch, 1, 1.0));
    const double value = t.value(loss)(0, 0);
    CheckFinite(value, "generator", iteration);
    t.Backward(loss);
    optimizer.Step(generator.params());
    return value;
  });
}

TrainResult Train(const tabular::EncodedMatrix& data, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.Validate();
  if (data.provenance() != tabular::Provenance::kReal) {
    throw DataError("training data must be real, not synthetic");
  }
  if (data.rows() < static_cast<std::size_t>(config.k)) {
    throw ConfigError("k = " + std::to_string(config.k) + " exceeds the " +
                      std::to_string(data.rows()) + " training rows");
  }
  if (data.rows() < 2) {
    throw DataError("training needs at least 2 real rows");
  }

  privacy::RdpLedger ledger(config.k, config.sigma, config.delta,
                            config.rdp_clamp);
  TrainResult result;
  result.epsilon_floor = ledger.GetEpsilon().value;
  if (config.epsilon_target <= result.epsilon_floor) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "epsilon_target %.6g is at or below the empty-ledger floor "
                  "%.6g (delta = %.3g); no iteration can run",
                  config.epsilon_target, result.epsilon_floor, config.delta);
    throw ConfigError(buf);
  }

  Rng partition_rng = MakeRng(config.seed, Stream::kPartition);
  Rng init_rng = MakeRng(config.seed, Stream::kInit);
  Rng latent_rng = MakeRng(config.seed, Stream::kLatent);
  Rng gumbel_rng = MakeRng(config.seed, Stream::kGumbel);
  Rng vote_rng = MakeRng(config.seed, Stream::kVoteNoise);

  const tabular::ShardedData sharded(
      data, tabular::PartitionShards(data.rows(), config.k, partition_rng));
  auto generator = std::make_unique<models::Generator>(
      data.schema_ptr(), config.generator, init_rng);
  std::unique_ptr<models::Student> student =
      models::MakeStudent(config.student_kind, data.schema(), init_rng);
  ad::Adam generator_opt(config.generator_adam);
  ad::Adam student_opt(config.student_adam);

  std::vector<models::Teacher> teachers;
  std::int64_t iteration = 0;
  while (ledger.GetEpsilon().value < config.epsilon_target &&
         iteration < config.max_outer_iterations) {
    ++iteration;

    // Teacher refresh: shard i against |D_i| fresh fakes.
    const tabular::EncodedMatrix fakes = generator->Generate(
        data.rows(), models::GenMode::kTrain, latent_rng, gumbel_rng);
    const std::vector<tabular::EncodedMatrix> fake_shards =
        SliceFakes(fakes, sharded.shard_set());
    std::vector<std::optional<models::Teacher>> fitted(config.k);
    ParallelFor(config.k, config.threads, [&](std::size_t i) {
      const models::Teacher* warm =
          config.teacher_warm_start && !teachers.empty() ? &teachers[i]
                                                         : nullptr;
      fitted[i].emplace(models::Teacher::Fit(sharded.shard(i), fake_shards[i],
                                             config.teacher, warm));
    });
    teachers.clear();
    for (auto& t : fitted) teachers.push_back(std::move(*t));

    // Query batch, tallies and noisy labels.
    const tabular::EncodedMatrix x_q = generator->Generate(
        config.batch, models::GenMode::kTrain, latent_rng, gumbel_rng);
    const std::vector<int> tallies = models::TallyVotes(teachers, x_q.values());
    std::vector<int> labels(tallies.size());
    double gap_sum = 0.0;
    int real_labels = 0;
    for (std::size_t j = 0; j < tallies.size(); ++j) {
      labels[j] =
          privacy::NoisyAggregate(tallies[j], config.k, config.sigma, vote_rng);
      gap_sum += std::fabs(tallies[j] - config.k / 2.0);
      real_labels += labels[j];
    }
    ledger.RecordQuery(tallies);
    const double epsilon_after = ledger.GetEpsilon().value;
    for (std::size_t j = 0; j < tallies.size(); ++j) {
      privacy::TraceRow row;
      row.outer_iteration = iteration;
      row.batch_index = 0;
      row.label_index = static_cast<std::int64_t>(j);
      row.tally = tallies[j];
      row.gap = std::fabs(tallies[j] - config.k / 2.0);
      row.q = privacy::FlipProbability(row.gap, config.sigma);
      row.epsilon_hat_after = epsilon_after;
      result.accountant_trace.push_back(row);
    }

    const std::vector<double> student_losses =
        StudentUpdate(*student, student_opt, x_q.values(), labels,
                      config.student_steps, iteration);
    const double generator_loss =
        GeneratorUpdate(*generator, *student, generator_opt, config.batch,
                        latent_rng, gumbel_rng, iteration);

    IterationTrace entry;
    entry.iteration = iteration;
    entry.epsilon_hat = ledger.GetEpsilon().value;
    entry.mean_gap = gap_sum / static_cast<double>(tallies.size());
    entry.frac_label_real =
        static_cast<double>(real_labels) / static_cast<double>(labels.size());
    double loss_sum = 0.0;
    for (double l : student_losses) loss_sum += l;
    entry.student_loss = loss_sum / static_cast<double>(student_losses.size());
    entry.generator_loss = generator_loss;
    result.trace.push_back(entry);
    if (hooks.on_iteration) {
      hooks.on_iteration(IterationView{result.trace.back(), *generator,
                                       *student, ledger, tallies});
    }
  }

  result.epsilon = ledger.GetEpsilon();
  result.budget_reached = result.epsilon.value >= config.epsilon_target;
  result.iterations = iteration;
  result.generator = std::move(generator);
  result.student = std::move(student);
  return result;
}

}  // namespace dpsynth::trainer
