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

// Gaussian noisy-max (GNMax) vote aggregation over a binary real/fake vote
// and its Renyi-DP accountant.
//
// Each released label j has teacher tally n_j out of k. Its flip
// probability is
//
//   q_j = erfc(gap_j / (2 sigma)) / 2,   gap_j = |n_j - k/2|,
//
// and its data-dependent RDP cost at integer order alpha is
//
//   1/(alpha-1) * log[ (1-q) ((1-q) / (1 - q e^{2/sigma^2}))^{alpha-1}
//                      + q e^{2(alpha-1)/sigma^2} ],
//
// valid while q e^{2/sigma^2} < 1. Outside that region, and as a clamp
// inside it, the data-independent bound alpha / sigma^2 applies. Costs add
// across labels per order, and the ledger converts to (epsilon, delta) with
//
//   epsilon(delta) = min_{alpha in 2..511} total(alpha) + log(1/delta)/(alpha-1).

#ifndef DPSYNTH_ACCOUNTANT_H_
#define DPSYNTH_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/rng.h"

namespace dpsynth::privacy {

inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 511;
inline constexpr int kNumOrders = kMaxOrder - kMinOrder + 1;

// Flip probabilities below this are treated as exactly zero cost.
inline constexpr double kQUnderflow = 1e-300;

double Erfc(double x);

// Throws ConfigError for sigma <= 0 or gap < 0.
double FlipProbability(double gap, double sigma);

// q * e^{2/sigma^2} < 1.
bool DataDependentBoundValid(double q, double sigma);

double DataIndependentCost(int alpha, double sigma);

// Per-label RDP cost at `alpha`. With clamp=false the data-dependent value is
// returned unclamped wherever it is valid.
double RdpCost(int alpha, double q, double sigma, bool clamp = true);

struct VoteRecord {
  std::vector<int> tallies;
  int k = 0;
  double sigma = 0.0;
};

struct Epsilon {
  double value = 0.0;
  double delta = 0.0;
  int order = kMaxOrder;
};

// min over the order grid; ties go to the smaller order. totals[i] is the
// accumulated cost at order kMinOrder + i.
Epsilon ConvertToEpsilon(std::span<const double> totals, double delta);

class RdpLedger {
 public:
  RdpLedger(int k, double sigma, double delta, bool clamp = true);

  // Charges every label in the batch. Labels with equal tallies have equal
  // costs, so the batch charge per order is sum_t count_t * cost(t).
  void RecordQuery(const VoteRecord& record);
  void RecordQuery(std::span<const int> tallies);

  Epsilon GetEpsilon() const { return ConvertToEpsilon(totals_, delta_); }

  std::span<const double> totals() const { return totals_; }
  double total(int alpha) const { return totals_[alpha - kMinOrder]; }
  std::uint64_t released() const { return released_; }
  int k() const { return k_; }
  double sigma() const { return sigma_; }
  double delta() const { return delta_; }
  bool clamp() const { return clamp_; }

  // Cost vector over the order grid for one label with this tally.
  const std::vector<double>& LabelCost(int tally) const;

 private:
  int k_;
  double sigma_;
  double delta_;
  bool clamp_;
  std::vector<double> totals_;
  std::uint64_t released_ = 0;
  std::vector<std::vector<double>> cost_by_tally_;
};

// Label 1[tally + noise > k/2] for a given noise draw.
int ThresholdVote(int tally, int k, double noise);

// 1[tally + N(0, sigma^2) > k/2]. sigma = 0 gives the deterministic majority.
int NoisyAggregate(int tally, int k, double sigma, Rng& rng);

// ---------------------------------------------------------------------------
// Accountant trace: one row per released label.

struct TraceRow {
  std::int64_t outer_iteration = 0;
  std::int64_t batch_index = 0;
  std::int64_t label_index = 0;
  int tally = 0;
  double gap = 0.0;
  double q = 0.0;
  // Epsilon after the batch containing this label was charged.
  double epsilon_hat_after = 0.0;
};

inline constexpr const char* kTraceHeader =
    "outer_iteration,batch_index,label_index,tally,gap,q,epsilon_hat_after";

std::string FormatTrace(std::span<const TraceRow> rows);
std::vector<TraceRow> ParseTrace(const std::string& text);

struct CurvePoint {
  std::int64_t outer_iteration = 0;
  std::int64_t batch_index = 0;
  std::uint64_t released = 0;
  double epsilon = 0.0;
  int order = kMaxOrder;
};

// Re-charges the trace batch by batch (consecutive rows sharing
// outer_iteration and batch_index) through a fresh ledger.
std::vector<CurvePoint> ReplayTrace(std::span<const TraceRow> rows, int k,
                                    double sigma, double delta,
                                    bool clamp = true);

inline constexpr const char* kCurveHeader =
    "outer_iteration,batch_index,labels_released,epsilon_hat,order";
std::string FormatCurve(std::span<const CurvePoint> points);

// %.17g, so values survive a text round trip exactly.
std::string FormatExact(double v);

}  // namespace dpsynth::privacy

#endif  // DPSYNTH_ACCOUNTANT_H_
