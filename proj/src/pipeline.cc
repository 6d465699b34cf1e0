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

#include "dpsynth/pipeline.h"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

#include "dpsynth/checkpoint.h"
#include "dpsynth/encoding.h"
#include "dpsynth/error.h"

namespace dpsynth::pipeline {
namespace {

using nlohmann::json;

json SchemaOptionsToJson(const tabular::SchemaOptions& o) {
  json force = json::array();
  for (const auto& [column, kind] : o.overrides) {
    force.push_back(std::string(tabular::ColumnKindName(kind)) + ":" + column);
  }
  return {{"target", o.target ? json(*o.target) : json()},
          {"positive_class", o.positive_class ? json(*o.positive_class) : json()},
          {"force", force},
          {"max_categories", o.max_categories}};
}

tabular::SchemaOptions SchemaOptionsFromJson(const json& j) {
  static const std::set<std::string> known = {"target", "positive_class",
                                              "force", "max_categories"};
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      throw ConfigError("unknown key '" + item.key() + "' in schema options");
    }
  }
  tabular::SchemaOptions o;
  if (j.contains("target") && !j["target"].is_null()) {
    o.target = j["target"].get<std::string>();
  }
  if (j.contains("positive_class") && !j["positive_class"].is_null()) {
    o.positive_class = j["positive_class"].get<std::string>();
  }
  if (j.contains("force")) {
    for (const json& spec : j["force"]) {
      auto [column, kind] = tabular::ParseOverride(spec.get<std::string>());
      o.overrides[column] = kind;
    }
  }
  o.max_categories = j.value("max_categories", o.max_categories);
  return o;
}

std::shared_ptr<const tabular::TableSchema> LoadSchema(const std::string& path) {
  try {
    return std::make_shared<const tabular::TableSchema>(
        tabular::TableSchema::FromJson(json::parse(tabular::ReadFile(path))));
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string JoinPath(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

json RunConfig::ToJson() const {
  return {{"data",
           {{"csv", csv},
            {"schema", schema_path.empty() ? json() : json(schema_path)},
            {"schema_options", SchemaOptionsToJson(schema_options)}}},
          {"train", train.ToJson()},
          {"eval", eval.ToJson()},
          {"checkpoint_every", checkpoint_every},
          {"output_dir", output_dir}};
}

RunConfig RunConfig::FromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::set<std::string> known = {
      "data", "train", "eval", "checkpoint_every", "output_dir", "versions"};
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      throw ConfigError("unknown key '" + item.key() + "' in run config");
    }
  }
  RunConfig c;
  try {
    if (j.contains("data")) {
      const json& d = j["data"];
      for (const auto& item : d.items()) {
        if (item.key() != "csv" && item.key() != "schema" &&
            item.key() != "schema_options") {
          throw ConfigError("unknown key '" + item.key() + "' in run data");
        }
      }
      c.csv = d.value("csv", "");
      if (d.contains("schema") && !d["schema"].is_null()) {
        c.schema_path = d["schema"].get<std::string>();
      }
      if (d.contains("schema_options")) {
        c.schema_options = SchemaOptionsFromJson(d["schema_options"]);
      }
    }
    if (j.contains("train")) c.train = trainer::TrainConfig::FromJson(j["train"]);
    if (j.contains("eval")) c.eval = eval::TstrConfig::FromJson(j["eval"]);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.output_dir = j.value("output_dir", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (c.checkpoint_every < 0) {
    throw ConfigError("checkpoint_every must be >= 0");
  }
  return c;
}

tabular::CsvTable LoadTable(const std::string& path,
                            tabular::CleanReport* report) {
  const tabular::CsvTable raw = tabular::ReadCsv(path);
  try {
    return tabular::CleanTable(raw, report);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

json InferSchemaJson(const std::string& csv_path,
                     const tabular::SchemaOptions& options) {
  const tabular::CsvTable table = LoadTable(csv_path);
  try {
    return tabular::InferSchema(table, options).ToJson();
  } catch (const DataError& e) {
    throw DataError(csv_path + ": " + e.what());
  }
}

json RunTraining(const RunConfig& config) {
  if (config.csv.empty()) throw ConfigError("run config: no training CSV");
  if (config.output_dir.empty()) throw ConfigError("run config: no output dir");
  config.train.Validate();
  config.eval.Validate();

  tabular::CleanReport clean;
  const tabular::CsvTable table = LoadTable(config.csv, &clean);
  std::shared_ptr<const tabular::TableSchema> schema;
  if (config.schema_path.empty()) {
    try {
      schema = std::make_shared<const tabular::TableSchema>(
          tabular::InferSchema(table, config.schema_options));
    } catch (const DataError& e) {
      throw DataError(config.csv + ": " + e.what());
    }
  } else {
    schema = LoadSchema(config.schema_path);
  }
  const tabular::EncodedMatrix data = tabular::Encode(table, schema);

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw DataError("cannot create " + config.output_dir + ": " + ec.message());
  }
  json resolved = config.ToJson();
  resolved["versions"] = {{"dpsynth", kVersion},
                          {"checkpoint_format", models::kCheckpointVersion}};
  tabular::WriteFileAtomic(JoinPath(config.output_dir, "config.json"),
                           resolved.dump(2) + "\n");
  tabular::WriteFileAtomic(JoinPath(config.output_dir, "schema.json"),
                           schema->ToJson().dump(2) + "\n");

  const std::string checkpoint = JoinPath(config.output_dir, "generator.ckpt");
  auto meta = [&](std::int64_t iteration, double epsilon, int order,
                  bool reached) {
    return json{{"iteration", iteration},
                {"epsilon", epsilon},
                {"order", order},
                {"delta", config.train.delta},
                {"budget_reached", reached},
                {"train_rows", data.rows()},
                {"seed", config.train.seed},
                {"student", models::StudentKindName(config.train.student_kind)}};
  };
  trainer::TrainHooks hooks;
  if (config.checkpoint_every > 0) {
    hooks.on_iteration = [&](const trainer::IterationView& v) {
      if (v.trace.iteration % config.checkpoint_every != 0) return;
      const privacy::Epsilon e = v.ledger.GetEpsilon();
      models::SaveGenerator(checkpoint, v.generator,
                            meta(v.trace.iteration, e.value, e.order, false));
    };
  }
  const trainer::TrainResult result = trainer::Train(data, config.train, hooks);

  const std::string ckpt_bytes = models::SerializeGenerator(
      *result.generator, meta(result.iterations, result.epsilon.value,
                              result.epsilon.order, result.budget_reached));
  tabular::WriteFileAtomic(checkpoint, ckpt_bytes);
  const std::string trace = trainer::FormatIterationTrace(result.trace);
  tabular::WriteFileAtomic(JoinPath(config.output_dir, "trace.csv"), trace);
  tabular::WriteFileAtomic(JoinPath(config.output_dir, "accountant_trace.csv"),
                           privacy::FormatTrace(result.accountant_trace));

  const double before = result.trace.size() > 1
                            ? result.trace[result.trace.size() - 2].epsilon_hat
                            : result.epsilon_floor;
  json summary = {{"epsilon", result.epsilon.value},
                  {"order", result.epsilon.order},
                  {"delta", result.epsilon.delta},
                  {"epsilon_target", config.train.epsilon_target},
                  {"epsilon_floor", result.epsilon_floor},
                  {"last_batch_delta", result.epsilon.value - before},
                  {"budget_reached", result.budget_reached},
                  {"iterations", result.iterations},
                  {"labels_released", result.accountant_trace.size()},
                  {"train_rows", data.rows()},
                  {"dropped_rows", clean.dropped_rows},
                  {"trace_sha256", Sha256Hex(trace)},
                  {"checkpoint_sha256", Sha256Hex(ckpt_bytes)}};
  tabular::WriteFileAtomic(JoinPath(config.output_dir, "summary.json"),
                           summary.dump(2) + "\n");
  return summary;
}

std::string GenerateCsv(const std::string& checkpoint_path, std::size_t n,
                        std::uint64_t seed) {
  if (n == 0) throw ConfigError("generate: n must be >= 1");
  models::LoadedGenerator loaded = models::LoadGenerator(checkpoint_path);
  Rng latent = MakeRng(seed, Stream::kLatent);
  Rng gumbel = MakeRng(seed, Stream::kGumbel);
  const tabular::EncodedMatrix synthetic = loaded.generator->Generate(
      n, models::GenMode::kSample, latent, gumbel);
  const tabular::TableSchema& schema = loaded.generator->schema();
  return tabular::FormatCsv(tabular::SchemaHeader(schema),
                            tabular::Decode(synthetic.values(), schema));
}

EvaluateOutput Evaluate(const EvaluateRequest& request) {
  if (request.checkpoint.empty() == request.synthetic_csv.empty()) {
    throw ConfigError("evaluate: give exactly one of a checkpoint or a "
                      "synthetic CSV");
  }
  eval::TstrConfig config = request.config;
  std::shared_ptr<const tabular::TableSchema> schema;
  std::unique_ptr<models::Generator> generator;
  std::optional<tabular::EncodedMatrix> synthetic;
  std::optional<double> epsilon, delta;
  if (!request.checkpoint.empty()) {
    models::LoadedGenerator loaded = models::LoadGenerator(request.checkpoint);
    generator = std::move(loaded.generator);
    schema = generator->schema_ptr();
    if (loaded.meta.contains("epsilon")) epsilon = loaded.meta["epsilon"];
    if (loaded.meta.contains("delta")) delta = loaded.meta["delta"];
    if (config.synthetic_rows == 0) {
      config.synthetic_rows = loaded.meta.value("train_rows", std::size_t{0});
    }
  } else {
    if (request.schema_path.empty()) {
      throw ConfigError("evaluate: a synthetic CSV needs a schema file");
    }
    schema = LoadSchema(request.schema_path);
    synthetic.emplace(tabular::Encode(LoadTable(request.synthetic_csv), schema,
                                      tabular::Provenance::kSynthetic));
  }
  const tabular::EncodedMatrix test =
      tabular::Encode(LoadTable(request.real_test), schema);
  if (generator && config.synthetic_rows == 0) {
    config.synthetic_rows = test.rows();
  }
  const eval::SyntheticSource source =
      generator ? eval::FromGenerator(*generator, config.synthetic_rows)
                : eval::FromTable(*synthetic);

  EvaluateOutput out;
  if (request.swap_positive) {
    eval::AuditReport audit = eval::LabelSwapAudit(source, test, config);
    audit.original.epsilon = audit.swapped.epsilon = epsilon;
    audit.original.delta = audit.swapped.delta = delta;
    out.report = audit.ToJson();
    // Prefix each data line with its panel name.
    auto prefix = [](const std::string& csv, const char* panel) {
      std::istringstream in(csv);
      std::string line, result;
      std::getline(in, line);
      while (std::getline(in, line)) result += std::string(panel) + "," + line + "\n";
      return result;
    };
    out.csv = "panel,classifier,run,seed,valid,auroc,aucpr\n" +
              prefix(audit.original.ToCsv(), "original") +
              prefix(audit.swapped.ToCsv(), "swapped");
    out.plot_csv = audit.ToPlotCsv();
  } else {
    eval::TstrReport report = eval::TstrEvaluate(source, test, config);
    report.epsilon = epsilon;
    report.delta = delta;
    out.report = report.ToJson();
    out.csv = report.ToCsv();
  }
  return out;
}

std::string ReplayCurve(std::string_view trace_csv, int k, double sigma,
                        double delta, bool clamp) {
  privacy::RdpLedger empty(k, sigma, delta, clamp);
  const privacy::Epsilon floor = empty.GetEpsilon();
  std::vector<privacy::CurvePoint> curve = {
      privacy::CurvePoint{0, 0, 0, floor.value, floor.order}};
  // A blank trace is an empty ledger.
  const bool blank =
      trace_csv.find_first_not_of(" \t\r\n") == std::string_view::npos;
  const std::vector<privacy::TraceRow> rows =
      blank ? std::vector<privacy::TraceRow>{}
            : privacy::ParseTrace(std::string(trace_csv));
  const std::vector<privacy::CurvePoint> replayed =
      privacy::ReplayTrace(rows, k, sigma, delta, clamp);
  curve.insert(curve.end(), replayed.begin(), replayed.end());
  return privacy::FormatCurve(curve);
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kInternal, "sha256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

}  // namespace dpsynth::pipeline
