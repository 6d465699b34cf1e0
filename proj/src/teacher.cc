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

#include "dpsynth/teacher.h"

#include <cmath>

#include "dpsynth/autodiff.h"
#include "dpsynth/error.h"

namespace dpsynth::models {

double LinearModel::Logit(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw DataError("linear model expects width " +
                    std::to_string(weights.size()) + ", got " +
                    std::to_string(x.size()));
  }
  double s = bias;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
  return s;
}

LogRegFit FitLogisticRegression(const Matrix& x, std::span<const double> y,
                                const LogRegConfig& config,
                                const LinearModel* warm_start) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0) throw DataError("logistic regression: empty training set");
  if (y.size() != n) throw DataError("logistic regression: label count mismatch");

  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += x(r, c);
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t c = 0; c < d; ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = x(r, c) - mean[c];
      var += dv * dv;
    }
    var /= static_cast<double>(n);
    scale[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  Matrix z(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) z(r, c) = (x(r, c) - mean[c]) / scale[c];

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  if (warm_start != nullptr && warm_start->weights.size() == d) {
    w = warm_start->weights;
    b = warm_start->bias;
  }
  std::vector<double> gw(d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < config.iterations; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      auto zr = z.row(r);
      double s = b;
      for (std::size_t c = 0; c < d; ++c) s += w[c] * zr[c];
      const double err = ad::SigmoidScalar(s) - y[r];
      gb += err;
      for (std::size_t c = 0; c < d; ++c) gw[c] += err * zr[c];
    }
    for (std::size_t c = 0; c < d; ++c) {
      w[c] -= config.lr * (gw[c] * inv_n + config.l2 * w[c]);
    }
    b -= config.lr * gb * inv_n;
  }
  LogRegFit fit;
  fit.standardized.weights = w;
  fit.standardized.bias = b;
  fit.raw.weights.resize(d);
  fit.raw.bias = b;
  for (std::size_t c = 0; c < d; ++c) {
    fit.raw.weights[c] = w[c] / scale[c];
    fit.raw.bias -= w[c] * mean[c] / scale[c];
  }
  for (double v : fit.raw.weights) {
    if (!std::isfinite(v)) throw NumericError("logistic regression diverged");
  }
  if (!std::isfinite(fit.raw.bias)) {
    throw NumericError("logistic regression diverged");
  }
  return fit;
}

Teacher::Teacher(LinearModel model, std::size_t shard_id,
                 LinearModel standardized)
    : model_(std::move(model)),
      standardized_(std::move(standardized)),
      shard_id_(shard_id) {}

Teacher Teacher::Fit(const tabular::ShardView& real,
                     const tabular::EncodedMatrix& fake,
                     const LogRegConfig& config, const Teacher* warm_start) {
  if (real.rows() == 0) throw DataError("teacher: empty real shard");
  if (fake.provenance() != tabular::Provenance::kSynthetic) {
    throw DataError("teacher: the fake shard must be synthetic");
  }
  if (fake.rows() != real.rows()) {
    throw DataError("teacher: fake shard has " + std::to_string(fake.rows()) +
                    " rows, real shard has " + std::to_string(real.rows()));
  }
  const Matrix real_rows = real.Rows();
  if (real_rows.cols() != fake.width()) {
    throw DataError("teacher: real and fake widths differ");
  }
  const std::size_t m = real_rows.rows(), d = real_rows.cols();
  Matrix x(2 * m, d);
  std::vector<double> y(2 * m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(real_rows.row(r).data(), d, x.row(r).data());
    std::copy_n(fake.values().row(r).data(), d, x.row(m + r).data());
    y[r] = 1.0;
  }
  const LinearModel* warm =
      warm_start != nullptr ? &warm_start->standardized_ : nullptr;
  LogRegFit fit = FitLogisticRegression(x, y, config, warm);
  return Teacher(std::move(fit.raw), real.index(), std::move(fit.standardized));
}

double Teacher::Score(std::span<const double> row) const {
  return ad::SigmoidScalar(model_.Logit(row));
}

int Teacher::Vote(std::span<const double> row) const {
  return model_.Logit(row) > 0.0 ? 1 : 0;
}

std::vector<int> TallyVotes(std::span<const Teacher> teachers,
                            const Matrix& queries) {
  std::vector<int> tallies(queries.rows(), 0);
  for (std::size_t r = 0; r < queries.rows(); ++r) {
    for (const Teacher& t : teachers) tallies[r] += t.Vote(queries.row(r));
  }
  return tallies;
}

}  // namespace dpsynth::models
