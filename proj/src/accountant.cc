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

#include "dpsynth/accountant.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dpsynth/csv.h"
#include "dpsynth/error.h"
#include "dpsynth/schema.h"

namespace dpsynth::privacy {

double Erfc(double x) { return std::erfc(x); }

double FlipProbability(double gap, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("flip_probability: sigma must be > 0");
  if (!(gap >= 0.0)) throw ConfigError("flip_probability: gap must be >= 0");
  return 0.5 * Erfc(gap / (2.0 * sigma));
}

bool DataDependentBoundValid(double q, double sigma) {
  return q * std::exp(2.0 / (sigma * sigma)) < 1.0;
}

double DataIndependentCost(int alpha, double sigma) {
  return static_cast<double>(alpha) / (sigma * sigma);
}

double RdpCost(int alpha, double q, double sigma, bool clamp) {
  const double bound = DataIndependentCost(alpha, sigma);
  if (q < kQUnderflow) return 0.0;
  if (!DataDependentBoundValid(q, sigma)) return bound;
  // Log-space: orders up to 511 overflow the direct powers.
  const long double a1 = static_cast<long double>(alpha - 1);
  const long double c = 2.0L / (static_cast<long double>(sigma) * sigma);
  const long double qe = static_cast<long double>(q) * std::exp(c);
  if (qe >= 1.0L) return bound;
  const long double log_1mq = std::log1p(-static_cast<long double>(q));
  const long double log_1mqe = std::log1p(-qe);
  const long double first = log_1mq + a1 * (log_1mq - log_1mqe);
  const long double second = std::log(static_cast<long double>(q)) + a1 * c;
  const long double hi = std::max(first, second);
  const long double lse =
      hi + std::log(std::exp(first - hi) + std::exp(second - hi));
  const double cost = std::max(0.0, static_cast<double>(lse / a1));
  return clamp ? std::min(cost, bound) : cost;
}

Epsilon ConvertToEpsilon(std::span<const double> totals, double delta) {
  if (totals.size() != static_cast<std::size_t>(kNumOrders)) {
    throw DataError("conversion expects totals for orders 2..511");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie in (0, 1)");
  }
  const double log_inv_delta = -std::log(delta);
  Epsilon best{INFINITY, delta, kMinOrder};
  for (int alpha = kMinOrder; alpha <= kMaxOrder; ++alpha) {
    const double eps =
        totals[alpha - kMinOrder] + log_inv_delta / static_cast<double>(alpha - 1);
    if (eps < best.value) {
      best.value = eps;
      best.order = alpha;
    }
  }
  return best;
}

RdpLedger::RdpLedger(int k, double sigma, double delta, bool clamp)
    : k_(k), sigma_(sigma), delta_(delta), clamp_(clamp),
      totals_(kNumOrders, 0.0) {
  if (k < 1) throw ConfigError("accountant: k must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("accountant: sigma must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("accountant: delta must lie in (0, 1)");
  }
  cost_by_tally_.resize(static_cast<std::size_t>(k) + 1);
  for (int t = 0; t <= k; ++t) {
    const double gap = std::abs(t - 0.5 * k);
    const double q = FlipProbability(gap, sigma);
    auto& costs = cost_by_tally_[t];
    costs.resize(kNumOrders);
    for (int alpha = kMinOrder; alpha <= kMaxOrder; ++alpha) {
      costs[alpha - kMinOrder] = RdpCost(alpha, q, sigma, clamp);
    }
  }
}

const std::vector<double>& RdpLedger::LabelCost(int tally) const {
  if (tally < 0 || tally > k_) {
    throw DataError("tally " + std::to_string(tally) + " outside [0, " +
                    std::to_string(k_) + "]");
  }
  return cost_by_tally_[tally];
}

void RdpLedger::RecordQuery(const VoteRecord& record) {
  if (record.k != k_ || record.sigma != sigma_) {
    throw ConfigError("vote record (k=" + std::to_string(record.k) +
                      ", sigma=" + FormatExact(record.sigma) +
                      ") does not match accountant (k=" + std::to_string(k_) +
                      ", sigma=" + FormatExact(sigma_) + ")");
  }
  RecordQuery(record.tallies);
}

void RdpLedger::RecordQuery(std::span<const int> tallies) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(k_) + 1, 0);
  for (int t : tallies) {
    LabelCost(t);  // range check
    ++counts[t];
  }
  for (int t = 0; t <= k_; ++t) {
    if (counts[t] == 0) continue;
    const double n = static_cast<double>(counts[t]);
    const auto& costs = cost_by_tally_[t];
    for (int i = 0; i < kNumOrders; ++i) totals_[i] += n * costs[i];
  }
  released_ += tallies.size();
}

int ThresholdVote(int tally, int k, double noise) {
  return static_cast<double>(tally) + noise > 0.5 * k ? 1 : 0;
}

int NoisyAggregate(int tally, int k, double sigma, Rng& rng) {
  if (tally < 0 || tally > k) throw DataError("tally outside [0, k]");
  if (!(sigma >= 0.0)) throw ConfigError("noise scale must be >= 0");
  const double noise = sigma > 0.0 ? sigma * StandardNormal(rng) : 0.0;
  return ThresholdVote(tally, k, noise);
}

// ---------------------------------------------------------------------------

std::string FormatExact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatTrace(std::span<const TraceRow> rows) {
  std::ostringstream out;
  out << kTraceHeader << "\n";
  for (const auto& r : rows) {
    out << r.outer_iteration << ',' << r.batch_index << ',' << r.label_index
        << ',' << r.tally << ',' << FormatExact(r.gap) << ','
        << FormatExact(r.q) << ',' << FormatExact(r.epsilon_hat_after) << "\n";
  }
  return out.str();
}

std::vector<TraceRow> ParseTrace(const std::string& text) {
  const tabular::CsvTable table = tabular::ParseCsv(text);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    header += (i ? "," : "") + table.header[i];
  }
  if (header != kTraceHeader) {
    throw DataError("accountant trace header must be '" +
                    std::string(kTraceHeader) + "'");
  }
  std::vector<TraceRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    std::vector<double> v;
    for (const auto& c : cells) {
      const auto x = tabular::ParseNumber(c);
      if (!x) {
        throw DataError("line " + std::to_string(table.lines[r]) +
                        ": bad number '" + c + "'");
      }
      v.push_back(*x);
    }
    TraceRow row;
    row.outer_iteration = static_cast<std::int64_t>(v[0]);
    row.batch_index = static_cast<std::int64_t>(v[1]);
    row.label_index = static_cast<std::int64_t>(v[2]);
    row.tally = static_cast<int>(v[3]);
    row.gap = v[4];
    row.q = v[5];
    row.epsilon_hat_after = v[6];
    rows.push_back(row);
  }
  return rows;
}

std::vector<CurvePoint> ReplayTrace(std::span<const TraceRow> rows, int k,
                                    double sigma, double delta, bool clamp) {
  RdpLedger ledger(k, sigma, delta, clamp);
  std::vector<CurvePoint> curve;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    std::vector<int> tallies;
    while (j < rows.size() && rows[j].outer_iteration == rows[i].outer_iteration &&
           rows[j].batch_index == rows[i].batch_index) {
      tallies.push_back(rows[j].tally);
      ++j;
    }
    ledger.RecordQuery(tallies);
    const Epsilon eps = ledger.GetEpsilon();
    curve.push_back({rows[i].outer_iteration, rows[i].batch_index,
                     ledger.released(), eps.value, eps.order});
    i = j;
  }
  return curve;
}

std::string FormatCurve(std::span<const CurvePoint> points) {
  std::ostringstream out;
  out << kCurveHeader << "\n";
  for (const auto& p : points) {
    out << p.outer_iteration << ',' << p.batch_index << ',' << p.released << ','
        << FormatExact(p.epsilon) << ',' << p.order << "\n";
  }
  return out.str();
}

}  // namespace dpsynth::privacy
