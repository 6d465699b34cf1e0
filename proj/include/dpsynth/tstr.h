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

#ifndef DPSYNTH_TSTR_H_
#define DPSYNTH_TSTR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpsynth/downstream.h"
#include "dpsynth/encoding.h"
#include "dpsynth/generator.h"
#include "json.hpp"

namespace dpsynth::eval {

struct TstrConfig {
  int runs = 5;
  // Run r uses seed + r for generation, classifier fitting and AP ties.
  std::uint64_t seed = 0;
  // Synthetic rows per run; 0 lets the caller choose (the CLI uses the real
  // training-set size).
  std::size_t synthetic_rows = 0;
  std::vector<ClassifierKind> classifiers{kAllClassifiers.begin(),
                                          kAllClassifiers.end()};
  // Drop degraded rows from the means instead of scoring them at chance.
  bool strict = false;
  std::size_t threads = 0;
  DownstreamConfig downstream;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TstrConfig FromJson(const nlohmann::json& j);
};

// Synthetic training set for one run.
using SyntheticSource =
    std::function<tabular::EncodedMatrix(int run, std::uint64_t run_seed)>;

// Samples `rows` rows per run in generation mode, with latent and Gumbel
// streams derived from the run seed. The generator must outlive the source.
SyntheticSource FromGenerator(models::Generator& generator, std::size_t rows);
// The same table for every run; runs then differ only in classifier seeds.
SyntheticSource FromTable(tabular::EncodedMatrix synthetic);

struct MetricRow {
  std::string classifier;
  int run = 0;
  std::uint64_t seed = 0;
  // False when the synthetic labels held one class; the row then carries
  // the metrics of a constant score.
  bool valid = true;
  std::string note;
  double auroc = 0.0;
  double aucpr = 0.0;
};

struct MeanRow {
  // A classifier name, or "all" for the mean over every included row.
  std::string classifier;
  int included = 0;
  // NaN when no row is included.
  double auroc = 0.0;
  double aucpr = 0.0;
};

struct TstrReport {
  std::string target;
  std::string positive_class;
  std::size_t test_rows = 0;
  // Fraction of positives in the real test set: the AP of a random ranking.
  double test_prevalence = 0.0;
  std::vector<std::size_t> synthetic_rows;
  int runs = 0;
  std::uint64_t seed = 0;
  bool strict = false;
  // Privacy budget of the generator, when known.
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::vector<MetricRow> rows;
  std::vector<MeanRow> means;
  MeanRow overall;

  nlohmann::json ToJson() const;
  static TstrReport FromJson(const nlohmann::json& j);
  // classifier,run,seed,valid,auroc,aucpr with "mean" rows appended.
  std::string ToCsv() const;
};

// Fits every configured classifier on each run's synthetic set and scores
// the real test set. Labels on both sides come from real_test's schema, so
// its positive class decides which target value counts as positive.
TstrReport TstrEvaluate(const SyntheticSource& source,
                        const tabular::EncodedMatrix& real_test,
                        const TstrConfig& config);

struct AuditReport {
  TstrReport original;
  TstrReport swapped;

  nlohmann::json ToJson() const;
  // panel,positive_class,classifier,auroc,aucpr,chance_ap per mean row.
  std::string ToPlotCsv() const;
};

// Runs the evaluation under the schema's positive class and again with the
// other target value as positive, refitting the classifiers each time.
AuditReport LabelSwapAudit(const SyntheticSource& source,
                           const tabular::EncodedMatrix& real_test,
                           const TstrConfig& config);

// Structural check of a report document against the published format.
// Throws DataError naming the first offending field.
void ValidateReportJson(const nlohmann::json& j);

}  // namespace dpsynth::eval

#endif  // DPSYNTH_TSTR_H_
