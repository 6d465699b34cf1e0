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

/* C interface to dpsynth. Every function returns a status code; on failure
 * dps_last_error() describes the problem on the calling thread. Strings
 * returned through char** out-parameters are heap allocated and must be
 * released with dps_string_free. Handles are opaque and owned by the caller.
 */

#ifndef DPSYNTH_DPSYNTH_H_
#define DPSYNTH_DPSYNTH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DPSYNTH_BUILDING_LIBRARY)
#define DPS_API __attribute__((visibility("default")))
#else
#define DPS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int dps_status;

#define DPS_OK 0
#define DPS_ERR_INTERNAL 1
#define DPS_ERR_CONFIG 2
#define DPS_ERR_DATA 3
#define DPS_ERR_NUMERIC 4

typedef struct dps_accountant dps_accountant;
typedef struct dps_generator dps_generator;

DPS_API const char* dps_version(void);
/* Message of the most recent failure on this thread ("" if none). */
DPS_API const char* dps_last_error(void);
DPS_API void dps_string_free(char* s);

/* Privacy math. */
DPS_API dps_status dps_erfc(double x, double* out);
DPS_API dps_status dps_flip_probability(double gap, double sigma, double* out);
DPS_API dps_status dps_rdp_cost(int alpha, double q, double sigma, int clamp,
                                double* out);

/* Renyi-DP ledger over orders 2..511. */
DPS_API dps_status dps_accountant_new(int k, double sigma, double delta,
                                      int clamp, dps_accountant** out);
DPS_API void dps_accountant_free(dps_accountant* acc);
/* Charges one query batch of vote tallies (each in [0, k]). */
DPS_API dps_status dps_accountant_record(dps_accountant* acc,
                                         const int* tallies, size_t n);
DPS_API dps_status dps_accountant_epsilon(const dps_accountant* acc,
                                          double* epsilon, int* order);
DPS_API dps_status dps_accountant_released(const dps_accountant* acc,
                                           uint64_t* labels);
/* Epsilon curve CSV for an accountant trace CSV; the first row is the empty
 * ledger. */
DPS_API dps_status dps_accountant_replay(const char* trace_csv, int k,
                                         double sigma, double delta, int clamp,
                                         char** curve_csv);

/* Ranking metrics; labels are 0 or 1. */
DPS_API dps_status dps_auroc(const double* scores, const int* labels, size_t n,
                             double* out);
DPS_API dps_status dps_average_precision(const double* scores,
                                         const int* labels, size_t n,
                                         uint64_t seed, double* out);

/* Schema inference. options_json may be NULL or an object with "target",
 * "positive_class", "force" (list of "kind:column") and "max_categories". */
DPS_API dps_status dps_schema_infer(const char* csv_path,
                                    const char* options_json,
                                    char** schema_json);
/* Stratified train/test split written to two CSV files. */
DPS_API dps_status dps_split(const char* csv_path, const char* target,
                             double test_fraction, uint64_t seed,
                             const char* train_out, const char* test_out);

/* Trains from a run config JSON and writes the run directory. Returns the
 * summary JSON; "budget_reached" is false when the iteration cap stopped
 * the run. */
DPS_API dps_status dps_train(const char* run_config_json, char** summary_json);

DPS_API dps_status dps_generator_load(const char* checkpoint_path,
                                      dps_generator** out);
DPS_API void dps_generator_free(dps_generator* gen);
/* Checkpoint metadata and schema as JSON. */
DPS_API dps_status dps_generator_info(const dps_generator* gen,
                                      char** info_json);
/* n decoded rows as CSV text; same seed, same rows. */
DPS_API dps_status dps_generator_sample_csv(dps_generator* gen, size_t n,
                                            uint64_t seed, char** csv);

/* Train-on-synthetic, test-on-real evaluation. request_json holds
 * "real_test", one of "checkpoint" or "synthetic_csv" (+ "schema"), an
 * optional "config" object and "swap_positive". Outputs may be NULL. */
DPS_API dps_status dps_evaluate(const char* request_json, char** report_json,
                                char** report_csv, char** plot_csv);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* DPSYNTH_DPSYNTH_H_ */
