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

#include "dpsynth/dpsynth.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <string>

#include "dpsynth/accountant.h"
#include "dpsynth/checkpoint.h"
#include "dpsynth/error.h"
#include "dpsynth/metrics.h"
#include "dpsynth/pipeline.h"
#include "dpsynth/shards.h"

struct dps_accountant {
  dpsynth::privacy::RdpLedger ledger;
};

struct dps_generator {
  dpsynth::models::LoadedGenerator loaded;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

dps_status Fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs fn and maps exceptions onto status codes.
template <typename Fn>
dps_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return DPS_OK;
  } catch (const dpsynth::Error& e) {
    return Fail(static_cast<int>(e.code()), e.what());
  } catch (const json::exception& e) {
    return Fail(DPS_ERR_CONFIG, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return Fail(DPS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(DPS_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(DPS_ERR_INTERNAL, "unknown error");
  }
}

void RequireArg(const void* p, const char* name) {
  if (p == nullptr) {
    throw dpsynth::ConfigError(std::string("argument '") + name +
                               "' must not be NULL");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void SetString(char** out, const std::string& s) {
  if (out != nullptr) *out = CopyString(s);
}

json ParseJson(const char* text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw dpsynth::ConfigError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
std::span<const T> Span(const T* p, size_t n) {
  if (n > 0) RequireArg(p, "array");
  return std::span<const T>(p, n);
}

}  // namespace

extern "C" {

const char* dps_version(void) { return dpsynth::pipeline::kVersion; }

const char* dps_last_error(void) { return g_last_error.c_str(); }

void dps_string_free(char* s) { std::free(s); }

dps_status dps_erfc(double x, double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = dpsynth::privacy::Erfc(x);
  });
}

dps_status dps_flip_probability(double gap, double sigma, double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = dpsynth::privacy::FlipProbability(gap, sigma);
  });
}

dps_status dps_rdp_cost(int alpha, double q, double sigma, int clamp,
                        double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = dpsynth::privacy::RdpCost(alpha, q, sigma, clamp != 0);
  });
}

dps_status dps_accountant_new(int k, double sigma, double delta, int clamp,
                              dps_accountant** out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = new dps_accountant{
        dpsynth::privacy::RdpLedger(k, sigma, delta, clamp != 0)};
  });
}

void dps_accountant_free(dps_accountant* acc) { delete acc; }

dps_status dps_accountant_record(dps_accountant* acc, const int* tallies,
                                 size_t n) {
  return Guard([&] {
    RequireArg(acc, "acc");
    acc->ledger.RecordQuery(Span(tallies, n));
  });
}

dps_status dps_accountant_epsilon(const dps_accountant* acc, double* epsilon,
                                  int* order) {
  return Guard([&] {
    RequireArg(acc, "acc");
    RequireArg(epsilon, "epsilon");
    const dpsynth::privacy::Epsilon e = acc->ledger.GetEpsilon();
    *epsilon = e.value;
    if (order != nullptr) *order = e.order;
  });
}

dps_status dps_accountant_released(const dps_accountant* acc,
                                   uint64_t* labels) {
  return Guard([&] {
    RequireArg(acc, "acc");
    RequireArg(labels, "labels");
    *labels = acc->ledger.released();
  });
}

dps_status dps_accountant_replay(const char* trace_csv, int k, double sigma,
                                 double delta, int clamp, char** curve_csv) {
  return Guard([&] {
    RequireArg(trace_csv, "trace_csv");
    RequireArg(curve_csv, "curve_csv");
    *curve_csv = CopyString(dpsynth::pipeline::ReplayCurve(
        trace_csv, k, sigma, delta, clamp != 0));
  });
}

dps_status dps_auroc(const double* scores, const int* labels, size_t n,
                     double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = dpsynth::eval::Auroc(Span(scores, n), Span(labels, n));
  });
}

dps_status dps_average_precision(const double* scores, const int* labels,
                                 size_t n, uint64_t seed, double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = dpsynth::eval::AveragePrecision(Span(scores, n), Span(labels, n),
                                           seed);
  });
}

dps_status dps_schema_infer(const char* csv_path, const char* options_json,
                            char** schema_json) {
  return Guard([&] {
    RequireArg(csv_path, "csv_path");
    RequireArg(schema_json, "schema_json");
    json options = json::object();
    if (options_json != nullptr) options = ParseJson(options_json, "options");
    json run = {{"data", {{"csv", csv_path}, {"schema_options", options}}}};
    const dpsynth::pipeline::RunConfig config =
        dpsynth::pipeline::RunConfig::FromJson(run);
    *schema_json = CopyString(
        dpsynth::pipeline::InferSchemaJson(csv_path, config.schema_options)
            .dump(2));
  });
}

dps_status dps_split(const char* csv_path, const char* target,
                     double test_fraction, uint64_t seed,
                     const char* train_out, const char* test_out) {
  return Guard([&] {
    RequireArg(csv_path, "csv_path");
    RequireArg(target, "target");
    RequireArg(train_out, "train_out");
    RequireArg(test_out, "test_out");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw dpsynth::ConfigError("test fraction must lie in (0, 1)");
    }
    const dpsynth::tabular::CsvTable table =
        dpsynth::pipeline::LoadTable(csv_path);
    const dpsynth::tabular::TableSplit split =
        dpsynth::tabular::StratifiedSplit(table, target, test_fraction, seed);
    dpsynth::tabular::WriteCsv(train_out, split.train.header, split.train.rows);
    dpsynth::tabular::WriteCsv(test_out, split.test.header, split.test.rows);
  });
}

dps_status dps_train(const char* run_config_json, char** summary_json) {
  return Guard([&] {
    RequireArg(run_config_json, "run_config_json");
    const dpsynth::pipeline::RunConfig config =
        dpsynth::pipeline::RunConfig::FromJson(
            ParseJson(run_config_json, "run config"));
    const json summary = dpsynth::pipeline::RunTraining(config);
    SetString(summary_json, summary.dump(2));
  });
}

dps_status dps_generator_load(const char* checkpoint_path,
                              dps_generator** out) {
  return Guard([&] {
    RequireArg(checkpoint_path, "checkpoint_path");
    RequireArg(out, "out");
    *out = new dps_generator{dpsynth::models::LoadGenerator(checkpoint_path)};
  });
}

void dps_generator_free(dps_generator* gen) { delete gen; }

dps_status dps_generator_info(const dps_generator* gen, char** info_json) {
  return Guard([&] {
    RequireArg(gen, "gen");
    RequireArg(info_json, "info_json");
    const dpsynth::models::Generator& g = *gen->loaded.generator;
    const json info = {{"meta", gen->loaded.meta},
                       {"schema", g.schema().ToJson()},
                       {"generator", g.config().ToJson()},
                       {"encoded_width", g.schema().EncodedWidth()}};
    *info_json = CopyString(info.dump(2));
  });
}

dps_status dps_generator_sample_csv(dps_generator* gen, size_t n,
                                    uint64_t seed, char** csv) {
  return Guard([&] {
    RequireArg(gen, "gen");
    RequireArg(csv, "csv");
    if (n == 0) throw dpsynth::ConfigError("sample size must be >= 1");
    dpsynth::models::Generator& g = *gen->loaded.generator;
    dpsynth::Rng latent = dpsynth::MakeRng(seed, dpsynth::Stream::kLatent);
    dpsynth::Rng gumbel = dpsynth::MakeRng(seed, dpsynth::Stream::kGumbel);
    const dpsynth::tabular::EncodedMatrix synthetic =
        g.Generate(n, dpsynth::models::GenMode::kSample, latent, gumbel);
    *csv = CopyString(dpsynth::tabular::FormatCsv(
        dpsynth::tabular::SchemaHeader(g.schema()),
        dpsynth::tabular::Decode(synthetic.values(), g.schema())));
  });
}

dps_status dps_evaluate(const char* request_json, char** report_json,
                        char** report_csv, char** plot_csv) {
  return Guard([&] {
    RequireArg(request_json, "request_json");
    const json j = ParseJson(request_json, "evaluation request");
    if (!j.is_object()) throw dpsynth::ConfigError("request must be an object");
    for (const auto& item : j.items()) {
      const std::string& key = item.key();
      if (key != "real_test" && key != "checkpoint" && key != "synthetic_csv" &&
          key != "schema" && key != "config" && key != "swap_positive") {
        throw dpsynth::ConfigError("unknown key '" + key +
                                   "' in evaluation request");
      }
    }
    dpsynth::pipeline::EvaluateRequest request;
    request.real_test = j.value("real_test", "");
    if (request.real_test.empty()) {
      throw dpsynth::ConfigError("evaluation request needs 'real_test'");
    }
    request.checkpoint = j.value("checkpoint", "");
    request.synthetic_csv = j.value("synthetic_csv", "");
    request.schema_path = j.value("schema", "");
    if (j.contains("config")) {
      request.config = dpsynth::eval::TstrConfig::FromJson(j["config"]);
    }
    request.swap_positive = j.value("swap_positive", false);
    const dpsynth::pipeline::EvaluateOutput out =
        dpsynth::pipeline::Evaluate(request);
    // Allocate everything before handing any pointer out.
    std::unique_ptr<char, decltype(&std::free)> a(nullptr, std::free),
        b(nullptr, std::free), c(nullptr, std::free);
    if (report_json != nullptr) a.reset(CopyString(out.report.dump(2)));
    if (report_csv != nullptr) b.reset(CopyString(out.csv));
    if (plot_csv != nullptr) c.reset(CopyString(out.plot_csv));
    if (report_json != nullptr) *report_json = a.release();
    if (report_csv != nullptr) *report_csv = b.release();
    if (plot_csv != nullptr) *plot_csv = c.release();
  });
}

}  // extern "C"
