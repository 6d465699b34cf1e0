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

#include "dpsynth/tstr.h"

#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "dpsynth/accountant.h"
#include "dpsynth/error.h"
#include "dpsynth/metrics.h"
#include "dpsynth/parallel.h"

namespace dpsynth::eval {
namespace {

using nlohmann::json;

constexpr const char* kReportFormat = "dpsynth-tstr-report";
constexpr const char* kAuditFormat = "dpsynth-label-swap-audit";
constexpr int kReportVersion = 1;

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(); }

double NumberOrNan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

MeanRow MeanOf(const std::string& name, const std::vector<const MetricRow*>& rows) {
  MeanRow m;
  m.classifier = name;
  m.included = static_cast<int>(rows.size());
  if (rows.empty()) {
    m.auroc = m.aucpr = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  double a = 0.0, p = 0.0;
  for (const MetricRow* r : rows) {
    a += r->auroc;
    p += r->aucpr;
  }
  m.auroc = a / static_cast<double>(rows.size());
  m.aucpr = p / static_cast<double>(rows.size());
  return m;
}

void Require(bool ok, const std::string& field) {
  if (!ok) throw DataError("report: missing or invalid field '" + field + "'");
}

void ValidateMean(const json& m, const std::string& where) {
  Require(m.is_object(), where);
  Require(m.contains("classifier") && m["classifier"].is_string(),
          where + ".classifier");
  Require(m.contains("included") && m["included"].is_number_integer(),
          where + ".included");
  for (const char* k : {"auroc", "aucpr"}) {
    Require(m.contains(k) && (m[k].is_number() || m[k].is_null()),
            where + "." + k);
  }
}

void ValidateTstr(const json& j) {
  Require(j.is_object(), "report");
  Require(j.value("format", "") == kReportFormat, "format");
  Require(j.contains("version") && j["version"] == kReportVersion, "version");
  for (const char* k : {"target", "positive_class"}) {
    Require(j.contains(k) && j[k].is_string(), k);
  }
  Require(j.contains("test_rows") && j["test_rows"].is_number_unsigned(),
          "test_rows");
  Require(j.contains("test_prevalence") && j["test_prevalence"].is_number(),
          "test_prevalence");
  Require(j.contains("runs") && j["runs"].is_number_integer(), "runs");
  Require(j.contains("seed") && j["seed"].is_number_unsigned(), "seed");
  Require(j.contains("strict") && j["strict"].is_boolean(), "strict");
  Require(j.contains("synthetic_rows") && j["synthetic_rows"].is_array(),
          "synthetic_rows");
  Require(j.contains("privacy") && j["privacy"].is_object(), "privacy");
  for (const char* k : {"epsilon", "delta"}) {
    const json& p = j["privacy"];
    Require(p.contains(k) && (p[k].is_number() || p[k].is_null()),
            std::string("privacy.") + k);
  }
  Require(j.contains("rows") && j["rows"].is_array(), "rows");
  for (std::size_t i = 0; i < j["rows"].size(); ++i) {
    const json& r = j["rows"][i];
    const std::string where = "rows[" + std::to_string(i) + "]";
    Require(r.is_object(), where);
    Require(r.contains("classifier") && r["classifier"].is_string(),
            where + ".classifier");
    Require(r.contains("run") && r["run"].is_number_integer(), where + ".run");
    Require(r.contains("seed") && r["seed"].is_number_unsigned(),
            where + ".seed");
    Require(r.contains("valid") && r["valid"].is_boolean(), where + ".valid");
    Require(r.contains("note") && r["note"].is_string(), where + ".note");
    for (const char* k : {"auroc", "aucpr"}) {
      Require(r.contains(k) && r[k].is_number() && r[k] >= 0.0 && r[k] <= 1.0,
              where + "." + k);
    }
  }
  Require(j.contains("means") && j["means"].is_array(), "means");
  for (std::size_t i = 0; i < j["means"].size(); ++i) {
    ValidateMean(j["means"][i], "means[" + std::to_string(i) + "]");
  }
  Require(j.contains("overall"), "overall");
  ValidateMean(j["overall"], "overall");
}

}  // namespace

void TstrConfig::Validate() const {
  if (runs < 1) throw ConfigError("evaluation runs must be >= 1");
  if (classifiers.empty()) throw ConfigError("no classifiers selected");
}

json TstrConfig::ToJson() const {
  json names = json::array();
  for (ClassifierKind k : classifiers) names.push_back(ClassifierName(k));
  return {{"runs", runs},
          {"seed", seed},
          {"synthetic_rows", synthetic_rows},
          {"classifiers", names},
          {"strict", strict},
          {"threads", threads}};
}

TstrConfig TstrConfig::FromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("evaluation config must be an object");
  static const std::set<std::string> known = {
      "runs", "seed", "synthetic_rows", "classifiers", "strict", "threads"};
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      throw ConfigError("unknown key '" + item.key() + "' in evaluation config");
    }
  }
  TstrConfig c;
  try {
    c.runs = j.value("runs", c.runs);
    c.seed = j.value("seed", c.seed);
    c.synthetic_rows = j.value("synthetic_rows", c.synthetic_rows);
    c.strict = j.value("strict", c.strict);
    c.threads = j.value("threads", c.threads);
    if (j.contains("classifiers")) {
      c.classifiers.clear();
      for (const json& n : j.at("classifiers")) {
        c.classifiers.push_back(ParseClassifierKind(n.get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("evaluation config: ") + e.what());
  }
  return c;
}

SyntheticSource FromGenerator(models::Generator& generator, std::size_t rows) {
  if (rows == 0) throw ConfigError("synthetic row count must be >= 1");
  return [&generator, rows](int, std::uint64_t run_seed) {
    Rng latent = MakeRng(run_seed, Stream::kLatent);
    Rng gumbel = MakeRng(run_seed, Stream::kGumbel);
    return generator.Generate(rows, models::GenMode::kSample, latent, gumbel);
  };
}

SyntheticSource FromTable(tabular::EncodedMatrix synthetic) {
  auto shared = std::make_shared<const tabular::EncodedMatrix>(std::move(synthetic));
  return [shared](int, std::uint64_t) { return *shared; };
}

TstrReport TstrEvaluate(const SyntheticSource& source,
                        const tabular::EncodedMatrix& real_test,
                        const TstrConfig& config) {
  config.Validate();
  const tabular::TableSchema& schema = real_test.schema();
  if (real_test.rows() == 0) throw DataError("real test set is empty");
  const std::vector<int> test_labels =
      tabular::TargetLabels(real_test.values(), schema);
  const Matrix test_x =
      tabular::FeaturesWithoutTarget(real_test.values(), schema);

  TstrReport report;
  report.target = schema.target;
  report.positive_class = schema.positive_class;
  report.test_rows = real_test.rows();
  std::size_t positives = 0;
  for (int y : test_labels) positives += static_cast<std::size_t>(y);
  report.test_prevalence =
      static_cast<double>(positives) / static_cast<double>(test_labels.size());
  report.runs = config.runs;
  report.seed = config.seed;
  report.strict = config.strict;

  // Synthetic sets are drawn sequentially; fitting and scoring fan out.
  struct RunData {
    std::uint64_t seed;
    Matrix x;
    std::vector<int> y;
  };
  std::vector<RunData> runs;
  for (int r = 0; r < config.runs; ++r) {
    const std::uint64_t run_seed = config.seed + static_cast<std::uint64_t>(r);
    const tabular::EncodedMatrix synthetic = source(r, run_seed);
    if (synthetic.width() != real_test.width() ||
        synthetic.schema().columns.size() != schema.columns.size()) {
      throw DataError("synthetic data width " +
                      std::to_string(synthetic.width()) +
                      " does not match the real test width " +
                      std::to_string(real_test.width()));
    }
    report.synthetic_rows.push_back(synthetic.rows());
    runs.push_back({run_seed,
                    tabular::FeaturesWithoutTarget(synthetic.values(), schema),
                    tabular::TargetLabels(synthetic.values(), schema)});
  }

  const std::size_t n_cls = config.classifiers.size();
  report.rows.resize(runs.size() * n_cls);
  ParallelFor(report.rows.size(), config.threads, [&](std::size_t slot) {
    const RunData& run = runs[slot / n_cls];
    const ClassifierKind kind = config.classifiers[slot % n_cls];
    MetricRow& row = report.rows[slot];
    row.classifier = ClassifierName(kind);
    row.run = static_cast<int>(slot / n_cls);
    row.seed = run.seed;
    std::vector<double> scores;
    try {
      scores = FitClassifier(kind, run.x, run.y, run.seed, config.downstream)
                   ->ScoreAll(test_x);
    } catch (const DegradedDataError& e) {
      row.valid = false;
      row.note = e.what();
      scores.assign(test_x.rows(), run.y.empty() ? 0.5 : run.y.front());
    }
    row.auroc = Auroc(scores, test_labels);
    row.aucpr = AveragePrecision(scores, test_labels, run.seed);
  });

  std::vector<const MetricRow*> all;
  for (ClassifierKind kind : config.classifiers) {
    std::vector<const MetricRow*> members;
    for (const MetricRow& r : report.rows) {
      if (r.classifier == ClassifierName(kind) && (r.valid || !config.strict)) {
        members.push_back(&r);
      }
    }
    all.insert(all.end(), members.begin(), members.end());
    report.means.push_back(MeanOf(ClassifierName(kind), members));
  }
  report.overall = MeanOf("all", all);
  return report;
}

json TstrReport::ToJson() const {
  json j;
  j["format"] = kReportFormat;
  j["version"] = kReportVersion;
  j["target"] = target;
  j["positive_class"] = positive_class;
  j["test_rows"] = test_rows;
  j["test_prevalence"] = test_prevalence;
  j["synthetic_rows"] = synthetic_rows;
  j["runs"] = runs;
  j["seed"] = seed;
  j["strict"] = strict;
  j["privacy"] = {{"epsilon", epsilon ? json(*epsilon) : json()},
                  {"delta", delta ? json(*delta) : json()}};
  j["rows"] = json::array();
  for (const MetricRow& r : rows) {
    j["rows"].push_back({{"classifier", r.classifier},
                         {"run", r.run},
                         {"seed", r.seed},
                         {"valid", r.valid},
                         {"note", r.note},
                         {"auroc", r.auroc},
                         {"aucpr", r.aucpr}});
  }
  auto mean_json = [](const MeanRow& m) {
    return json{{"classifier", m.classifier},
                {"included", m.included},
                {"auroc", NumberOrNull(m.auroc)},
                {"aucpr", NumberOrNull(m.aucpr)}};
  };
  j["means"] = json::array();
  for (const MeanRow& m : means) j["means"].push_back(mean_json(m));
  j["overall"] = mean_json(overall);
  return j;
}

TstrReport TstrReport::FromJson(const json& j) {
  ValidateTstr(j);
  TstrReport r;
  r.target = j["target"];
  r.positive_class = j["positive_class"];
  r.test_rows = j["test_rows"];
  r.test_prevalence = j["test_prevalence"];
  r.synthetic_rows = j["synthetic_rows"].get<std::vector<std::size_t>>();
  r.runs = j["runs"];
  r.seed = j["seed"];
  r.strict = j["strict"];
  if (!j["privacy"]["epsilon"].is_null()) r.epsilon = j["privacy"]["epsilon"];
  if (!j["privacy"]["delta"].is_null()) r.delta = j["privacy"]["delta"];
  for (const json& row : j["rows"]) {
    r.rows.push_back({row["classifier"], row["run"], row["seed"], row["valid"],
                      row["note"], row["auroc"], row["aucpr"]});
  }
  auto mean_from = [](const json& m) {
    return MeanRow{m["classifier"], m["included"], NumberOrNan(m["auroc"]),
                   NumberOrNan(m["aucpr"])};
  };
  for (const json& m : j["means"]) r.means.push_back(mean_from(m));
  r.overall = mean_from(j["overall"]);
  return r;
}

std::string TstrReport::ToCsv() const {
  std::ostringstream out;
  out << "classifier,run,seed,valid,auroc,aucpr\n";
  for (const MetricRow& r : rows) {
    out << r.classifier << ',' << r.run << ',' << r.seed << ','
        << (r.valid ? 1 : 0) << ',' << privacy::FormatExact(r.auroc) << ','
        << privacy::FormatExact(r.aucpr) << '\n';
  }
  auto mean_line = [&](const MeanRow& m) {
    out << m.classifier << ",mean,," << m.included << ','
        << privacy::FormatExact(m.auroc) << ','
        << privacy::FormatExact(m.aucpr) << '\n';
  };
  for (const MeanRow& m : means) mean_line(m);
  mean_line(overall);
  return out.str();
}

AuditReport LabelSwapAudit(const SyntheticSource& source,
                           const tabular::EncodedMatrix& real_test,
                           const TstrConfig& config) {
  AuditReport audit;
  audit.original = TstrEvaluate(source, real_test, config);
  auto swapped_schema = std::make_shared<const tabular::TableSchema>(
      real_test.schema().WithSwappedPositive());
  const tabular::EncodedMatrix swapped_test(
      real_test.values(), swapped_schema, tabular::Provenance::kReal);
  audit.swapped = TstrEvaluate(source, swapped_test, config);
  return audit;
}

json AuditReport::ToJson() const {
  return {{"format", kAuditFormat},
          {"version", kReportVersion},
          {"original", original.ToJson()},
          {"swapped", swapped.ToJson()},
          {"chance_ap",
           {{"original", original.test_prevalence},
            {"swapped", swapped.test_prevalence}}}};
}

std::string AuditReport::ToPlotCsv() const {
  std::ostringstream out;
  out << "panel,positive_class,classifier,auroc,aucpr,chance_ap\n";
  auto panel = [&](const char* name, const TstrReport& r) {
    auto line = [&](const MeanRow& m) {
      out << name << ',' << r.positive_class << ',' << m.classifier << ','
          << privacy::FormatExact(m.auroc) << ','
          << privacy::FormatExact(m.aucpr) << ','
          << privacy::FormatExact(r.test_prevalence) << '\n';
    };
    for (const MeanRow& m : r.means) line(m);
    line(r.overall);
  };
  panel("original", original);
  panel("swapped", swapped);
  return out.str();
}

void ValidateReportJson(const json& j) {
  Require(j.is_object() && j.contains("format") && j["format"].is_string(),
          "format");
  if (j["format"] == kAuditFormat) {
    Require(j.contains("version") && j["version"] == kReportVersion, "version");
    Require(j.contains("original"), "original");
    Require(j.contains("swapped"), "swapped");
    ValidateTstr(j["original"]);
    ValidateTstr(j["swapped"]);
    Require(j.contains("chance_ap") && j["chance_ap"].is_object() &&
                j["chance_ap"].contains("original") &&
                j["chance_ap"].contains("swapped"),
            "chance_ap");
    return;
  }
  ValidateTstr(j);
}

}  // namespace dpsynth::eval
