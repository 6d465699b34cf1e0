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

// dpsynth command-line tool. Links only the C interface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpsynth/dpsynth.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitCapReached = 1;

// A failure carrying the process exit code.
class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

void Check(dps_status status) {
  if (status != DPS_OK) throw CommandError(status, dps_last_error());
}

// Owns a string returned by the C interface.
class ApiString {
 public:
  ApiString() = default;
  ApiString(const ApiString&) = delete;
  ApiString& operator=(const ApiString&) = delete;
  ~ApiString() { dps_string_free(p_); }

  char** out() { return &p_; }
  std::string str() const { return p_ ? std::string(p_) : std::string(); }

 private:
  char* p_ = nullptr;
};

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(DPS_ERR_DATA, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json ReadJsonFile(const std::string& path) {
  const std::string text = ReadText(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw CommandError(DPS_ERR_CONFIG, path + ": " + e.what());
  }
}

// Writes to a temporary sibling and renames, or to stdout for "" and "-".
void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CommandError(DPS_ERR_DATA, "cannot write file: " + path);
    out << text;
    if (!out.flush()) {
      throw CommandError(DPS_ERR_DATA, "cannot write file: " + path);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw CommandError(DPS_ERR_DATA,
                       "cannot write file: " + path + ": " + ec.message());
  }
}

template <typename T>
void Override(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

// schema

struct SchemaArgs {
  std::string csv;
  std::optional<std::string> target, positive;
  std::vector<std::string> force;
  std::optional<int> max_categories;
  std::string out;
};

void AddSchemaOptions(CLI::App* cmd, SchemaArgs& a) {
  cmd->add_option("--target", a.target, "Target column (default: last)");
  cmd->add_option("--positive", a.positive, "Positive class of the target");
  cmd->add_option("--force", a.force,
                  "Column kind override, KIND:COLUMN (repeatable)");
  cmd->add_option("--max-categories", a.max_categories,
                  "Most distinct values for an inferred categorical");
}

json SchemaOptionsJson(const SchemaArgs& a, json base = json::object()) {
  Override(base, "target", a.target);
  Override(base, "positive_class", a.positive);
  if (!a.force.empty()) base["force"] = a.force;
  Override(base, "max_categories", a.max_categories);
  return base;
}

int RunSchema(const SchemaArgs& a) {
  ApiString schema;
  Check(dps_schema_infer(a.csv.c_str(), SchemaOptionsJson(a).dump().c_str(),
                         schema.out()));
  WriteOutput(a.out, schema.str() + "\n");
  return 0;
}

// split

struct SplitArgs {
  std::string csv, target, train_out, test_out;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

int RunSplit(const SplitArgs& a) {
  Check(dps_split(a.csv.c_str(), a.target.c_str(), a.test_fraction, a.seed,
                  a.train_out.c_str(), a.test_out.c_str()));
  return 0;
}

// train

struct TrainArgs {
  std::optional<std::string> config, csv, schema, out, trace;
  SchemaArgs schema_options;
  std::optional<int> k, batch, student_steps;
  std::optional<double> sigma, epsilon, delta;
  std::optional<std::int64_t> max_iterations, checkpoint_every;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> student;
  std::optional<std::size_t> threads;
  bool no_rdp_clamp = false;
  bool teacher_warm_start = false;
};

json MergeTrainConfig(const TrainArgs& a) {
  json j = a.config ? ReadJsonFile(*a.config) : json::object();
  if (!j.is_object()) {
    throw CommandError(DPS_ERR_CONFIG, "run config must be a JSON object");
  }
  j.erase("versions");
  json& data = j["data"];
  if (data.is_null()) data = json::object();
  Override(data, "csv", a.csv);
  Override(data, "schema", a.schema);
  data["schema_options"] = SchemaOptionsJson(
      a.schema_options, data.value("schema_options", json::object()));

  json& train = j["train"];
  if (train.is_null()) train = json::object();
  Override(train, "k", a.k);
  Override(train, "sigma", a.sigma);
  Override(train, "batch", a.batch);
  Override(train, "student_steps", a.student_steps);
  Override(train, "epsilon_target", a.epsilon);
  Override(train, "delta", a.delta);
  Override(train, "max_outer_iterations", a.max_iterations);
  Override(train, "seed", a.seed);
  Override(train, "student", a.student);
  Override(train, "threads", a.threads);
  if (a.no_rdp_clamp) train["rdp_clamp"] = false;
  if (a.teacher_warm_start) train["teacher_warm_start"] = true;
  Override(j, "checkpoint_every", a.checkpoint_every);
  Override(j, "output_dir", a.out);
  return j;
}

int RunTrain(const TrainArgs& a) {
  const json config = MergeTrainConfig(a);
  ApiString summary_text;
  Check(dps_train(config.dump().c_str(), summary_text.out()));
  const json summary = json::parse(summary_text.str());
  std::cout << summary.dump(2) << "\n";
  if (a.trace) {
    const std::string dir = config.value("output_dir", "");
    WriteOutput(*a.trace,
                ReadText((std::filesystem::path(dir) / "accountant_trace.csv")
                             .string()));
  }
  if (!summary.value("budget_reached", false)) {
    std::cerr << "dpsynth: iteration cap reached before the privacy budget\n";
    return kExitCapReached;
  }
  return 0;
}

// generate

struct GenerateArgs {
  std::string checkpoint, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

int RunGenerate(const GenerateArgs& a) {
  dps_generator* raw = nullptr;
  Check(dps_generator_load(a.checkpoint.c_str(), &raw));
  std::unique_ptr<dps_generator, decltype(&dps_generator_free)> gen(
      raw, dps_generator_free);
  ApiString csv;
  Check(dps_generator_sample_csv(gen.get(), a.n, a.seed, csv.out()));
  WriteOutput(a.out, csv.str());
  return 0;
}

// evaluate / audit

struct EvaluateArgs {
  std::string real_test;
  std::optional<std::string> checkpoint, synthetic, schema, config;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> synthetic_rows, threads;
  std::vector<std::string> classifiers;
  bool strict = false;
  bool swap_positive = false;
  std::string out, csv, plot;
};

void AddEvaluateOptions(CLI::App* cmd, EvaluateArgs& a) {
  cmd->add_option("--real-test", a.real_test, "Held-out real CSV")->required();
  auto* ckpt = cmd->add_option("--checkpoint", a.checkpoint,
                               "Generator checkpoint to sample from");
  auto* syn = cmd->add_option("--synthetic", a.synthetic, "Synthetic CSV");
  ckpt->excludes(syn);
  cmd->add_option("--schema", a.schema, "Schema JSON (with --synthetic)")
      ->needs(syn);
  cmd->add_option("--config", a.config,
                  "Evaluation config JSON, or a run config with an 'eval' "
                  "section");
  cmd->add_option("--runs", a.runs, "Independent runs per classifier");
  cmd->add_option("--seed", a.seed, "Base seed; run r uses seed + r");
  cmd->add_option("--synthetic-rows", a.synthetic_rows,
                  "Rows sampled per run (default: training-set size)");
  cmd->add_option("--classifiers", a.classifiers,
                  "Subset of logreg,decision_tree,random_forest,adaboost,mlp")
      ->delimiter(',');
  cmd->add_option("--threads", a.threads, "Worker threads (0: all cores)");
  cmd->add_flag("--strict", a.strict, "Exclude degraded runs from the means");
  cmd->add_option("--out", a.out, "Report JSON (default: stdout)");
  cmd->add_option("--csv", a.csv, "Per-run rows as CSV");
}

int RunEvaluate(const EvaluateArgs& a, bool audit) {
  if (!a.checkpoint && !a.synthetic) {
    throw CommandError(DPS_ERR_CONFIG,
                       "give --checkpoint or --synthetic with --schema");
  }
  json config = json::object();
  if (a.config) {
    const json file = ReadJsonFile(*a.config);
    config = file.contains("eval") ? file["eval"] : file;
  }
  Override(config, "runs", a.runs);
  Override(config, "seed", a.seed);
  Override(config, "synthetic_rows", a.synthetic_rows);
  Override(config, "threads", a.threads);
  if (!a.classifiers.empty()) config["classifiers"] = a.classifiers;
  if (a.strict) config["strict"] = true;

  json request = {{"real_test", a.real_test},
                  {"config", config},
                  {"swap_positive", audit || a.swap_positive}};
  if (a.checkpoint) request["checkpoint"] = *a.checkpoint;
  if (a.synthetic) request["synthetic_csv"] = *a.synthetic;
  if (a.schema) request["schema"] = *a.schema;

  ApiString report, csv, plot;
  Check(dps_evaluate(request.dump().c_str(), report.out(), csv.out(),
                     plot.out()));
  WriteOutput(a.out, report.str() + "\n");
  if (!a.csv.empty()) WriteOutput(a.csv, csv.str());
  if (!a.plot.empty()) WriteOutput(a.plot, plot.str());
  return 0;
}

// accountant

struct AccountantArgs {
  std::optional<std::string> trace, run;
  std::optional<int> k;
  std::optional<double> sigma, delta;
  std::vector<std::string> what_if;
  bool no_rdp_clamp = false;
  std::string out;
};

int RunAccountant(const AccountantArgs& a) {
  int k = 10;
  double sigma = 1.0, delta = 1e-5;
  bool clamp = true;
  std::string trace;
  if (a.run) {
    const std::filesystem::path dir(*a.run);
    const json config = ReadJsonFile((dir / "config.json").string());
    const json train = config.value("train", json::object());
    k = train.value("k", k);
    sigma = train.value("sigma", sigma);
    delta = train.value("delta", delta);
    clamp = train.value("rdp_clamp", clamp);
    trace = ReadText((dir / "accountant_trace.csv").string());
  }
  if (a.trace) trace = ReadText(*a.trace);
  if (a.k) k = *a.k;
  if (a.sigma) sigma = *a.sigma;
  if (a.delta) delta = *a.delta;
  if (a.no_rdp_clamp) clamp = false;
  for (const std::string& change : a.what_if) {
    const std::size_t eq = change.find('=');
    const std::string key = change.substr(0, eq);
    double value = 0.0;
    try {
      if (eq == std::string::npos) throw std::invalid_argument(change);
      std::size_t used = 0;
      value = std::stod(change.substr(eq + 1), &used);
      if (used != change.size() - eq - 1) throw std::invalid_argument(change);
    } catch (const std::exception&) {
      throw CommandError(DPS_ERR_CONFIG,
                         "--what-if expects KEY=NUMBER, got '" + change + "'");
    }
    if (key == "sigma") {
      sigma = value;
    } else if (key == "delta") {
      delta = value;
    } else {
      throw CommandError(DPS_ERR_CONFIG, "--what-if key must be sigma or "
                                         "delta, got '" + key + "'");
    }
  }

  ApiString curve;
  Check(dps_accountant_replay(trace.c_str(), k, sigma, delta, clamp ? 1 : 0,
                              curve.out()));
  WriteOutput(a.out, curve.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private tabular synthesis"};
  app.set_version_flag("--version", std::string(dps_version()));
  app.require_subcommand(1);

  SchemaArgs schema;
  auto* schema_cmd = app.add_subcommand("schema", "Infer a table schema");
  schema_cmd->add_option("--csv", schema.csv, "Input CSV")->required();
  AddSchemaOptions(schema_cmd, schema);
  schema_cmd->add_option("--out", schema.out, "Schema JSON (default: stdout)");

  SplitArgs split;
  auto* split_cmd =
      app.add_subcommand("split", "Stratified train/test split of a CSV");
  split_cmd->add_option("--csv", split.csv, "Input CSV")->required();
  split_cmd->add_option("--target", split.target, "Target column")->required();
  split_cmd->add_option("--test-fraction", split.test_fraction,
                        "Share of each class held out")
      ->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")
      ->capture_default_str();
  split_cmd->add_option("--train-out", split.train_out, "Train CSV")
      ->required();
  split_cmd->add_option("--test-out", split.test_out, "Test CSV")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand(
      "train", "Train a generator until the privacy budget is spent");
  train_cmd->add_option("--config", train.config,
                        "Run config JSON; flags override its values");
  train_cmd->add_option("--csv", train.csv, "Training CSV");
  train_cmd->add_option("--schema", train.schema,
                        "Schema JSON (default: inferred)");
  AddSchemaOptions(train_cmd, train.schema_options);
  train_cmd->add_option("--k", train.k, "Number of teachers");
  train_cmd->add_option("--sigma", train.sigma, "Vote noise scale");
  train_cmd->add_option("--batch", train.batch, "Query batch size");
  train_cmd->add_option("--student-steps", train.student_steps,
                        "Student updates per iteration");
  train_cmd->add_option("--epsilon", train.epsilon, "Privacy budget");
  train_cmd->add_option("--delta", train.delta, "Privacy delta");
  train_cmd->add_option("--max-iterations", train.max_iterations,
                        "Outer iteration cap");
  train_cmd->add_option("--seed", train.seed, "Master seed");
  train_cmd->add_option("--student", train.student, "transformer or mlp");
  train_cmd->add_option("--threads", train.threads,
                        "Teacher threads (0: all cores)");
  train_cmd->add_flag("--no-rdp-clamp", train.no_rdp_clamp,
                      "Do not cap per-label cost at alpha/sigma^2");
  train_cmd->add_flag("--teacher-warm-start", train.teacher_warm_start,
                      "Start each teacher fit from its previous weights");
  train_cmd->add_option("--checkpoint-every", train.checkpoint_every,
                        "Checkpoint interval in iterations");
  train_cmd->add_option("--out", train.out, "Run directory");
  train_cmd->add_option("--trace", train.trace,
                        "Also write the accountant trace here");

  GenerateArgs generate;
  auto* generate_cmd =
      app.add_subcommand("generate", "Sample synthetic rows from a checkpoint");
  generate_cmd->add_option("--checkpoint", generate.checkpoint, "Checkpoint")
      ->required();
  generate_cmd->add_option("--n", generate.n, "Rows to sample")->required();
  generate_cmd->add_option("--seed", generate.seed, "Sampling seed")
      ->capture_default_str();
  generate_cmd->add_option("--out", generate.out, "CSV (default: stdout)");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Train on synthetic data, test on real data");
  AddEvaluateOptions(evaluate_cmd, evaluate);
  evaluate_cmd->add_flag("--swap-positive", evaluate.swap_positive,
                         "Also score with the other class as positive");
  evaluate_cmd->add_option("--plot", evaluate.plot,
                           "Per-panel means as CSV (with --swap-positive)");

  EvaluateArgs audit;
  auto* audit_cmd = app.add_subcommand(
      "audit", "Evaluate under both positive-class conventions");
  AddEvaluateOptions(audit_cmd, audit);
  audit_cmd->add_option("--plot", audit.plot, "Per-panel means as CSV");

  AccountantArgs accountant;
  auto* accountant_cmd = app.add_subcommand(
      "accountant", "Epsilon curve of a recorded tally trace");
  auto* trace_opt =
      accountant_cmd->add_option("--trace", accountant.trace, "Trace CSV");
  accountant_cmd
      ->add_option("--run", accountant.run,
                   "Run directory; reads its config and trace")
      ->excludes(trace_opt);
  accountant_cmd->add_option("--k", accountant.k, "Number of teachers");
  accountant_cmd->add_option("--sigma", accountant.sigma, "Vote noise scale");
  accountant_cmd->add_option("--delta", accountant.delta, "Privacy delta");
  accountant_cmd->add_option("--what-if", accountant.what_if,
                             "Replay with KEY=VALUE changed (sigma, delta)");
  accountant_cmd->add_flag("--no-rdp-clamp", accountant.no_rdp_clamp,
                           "Do not cap per-label cost at alpha/sigma^2");
  accountant_cmd->add_option("--out", accountant.out, "CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : DPS_ERR_CONFIG;
  }

  try {
    if (*schema_cmd) return RunSchema(schema);
    if (*split_cmd) return RunSplit(split);
    if (*train_cmd) return RunTrain(train);
    if (*generate_cmd) return RunGenerate(generate);
    if (*evaluate_cmd) return RunEvaluate(evaluate, false);
    if (*audit_cmd) return RunEvaluate(audit, true);
    if (*accountant_cmd) return RunAccountant(accountant);
  } catch (const CommandError& e) {
    std::cerr << "dpsynth: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "dpsynth: " << e.what() << "\n";
    return DPS_ERR_INTERNAL;
  }
  return DPS_ERR_INTERNAL;
}
