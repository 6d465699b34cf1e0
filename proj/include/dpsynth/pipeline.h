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

#ifndef DPSYNTH_PIPELINE_H_
#define DPSYNTH_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpsynth/csv.h"
#include "dpsynth/schema.h"
#include "dpsynth/trainer.h"
#include "dpsynth/tstr.h"
#include "json.hpp"

// File-level workflows shared by the C API and the command-line tool.
namespace dpsynth::pipeline {

inline constexpr const char* kVersion = "0.1.0";

// Everything needed to reproduce a training run.
struct RunConfig {
  std::string csv;
  // Schema file; when empty the schema is inferred from `csv`.
  std::string schema_path;
  tabular::SchemaOptions schema_options;
  trainer::TrainConfig train;
  // Settings for later evaluation of this run's generator.
  eval::TstrConfig eval;
  // Write the generator checkpoint every n iterations (0: only at exit).
  std::int64_t checkpoint_every = 0;
  std::string output_dir;

  nlohmann::json ToJson() const;
  // Unknown keys are a ConfigError.
  static RunConfig FromJson(const nlohmann::json& j);
};

// Reads and cleans a CSV file.
tabular::CsvTable LoadTable(const std::string& path,
                            tabular::CleanReport* report = nullptr);

nlohmann::json InferSchemaJson(const std::string& csv_path,
                               const tabular::SchemaOptions& options);

// Writes the run directory: config.json (resolved), schema.json,
// generator.ckpt, trace.csv, accountant_trace.csv and summary.json. Returns
// the summary document.
nlohmann::json RunTraining(const RunConfig& config);

// Decoded CSV text of n rows sampled in generation mode.
std::string GenerateCsv(const std::string& checkpoint_path, std::size_t n,
                        std::uint64_t seed);

struct EvaluateRequest {
  std::string real_test;
  // Exactly one of checkpoint and synthetic_csv.
  std::string checkpoint;
  std::string synthetic_csv;
  // Required with synthetic_csv; ignored with a checkpoint.
  std::string schema_path;
  eval::TstrConfig config;
  bool swap_positive = false;
};

struct EvaluateOutput {
  nlohmann::json report;
  // Per-row CSV flattening (both panels for an audit).
  std::string csv;
  // Audit only: mean rows per panel with the chance-level AP.
  std::string plot_csv;
};

EvaluateOutput Evaluate(const EvaluateRequest& request);

// Epsilon curve of a recorded accountant trace. The first row is the empty
// ledger (iteration 0, no labels released).
std::string ReplayCurve(std::string_view trace_csv, int k, double sigma,
                        double delta, bool clamp);

// Lower-case hex SHA-256.
std::string Sha256Hex(std::string_view bytes);

}  // namespace dpsynth::pipeline

#endif  // DPSYNTH_PIPELINE_H_
