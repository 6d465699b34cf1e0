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

#ifndef DPSYNTH_DOWNSTREAM_H_
#define DPSYNTH_DOWNSTREAM_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/error.h"
#include "dpsynth/matrix.h"
#include "dpsynth/optim.h"
#include "dpsynth/rng.h"
#include "dpsynth/teacher.h"

namespace dpsynth::eval {

enum class ClassifierKind {
  kLogReg,
  kDecisionTree,
  kRandomForest,
  kAdaBoost,
  kMlp,
};

inline constexpr std::array<ClassifierKind, 5> kAllClassifiers = {
    ClassifierKind::kLogReg, ClassifierKind::kDecisionTree,
    ClassifierKind::kRandomForest, ClassifierKind::kAdaBoost,
    ClassifierKind::kMlp};

std::string ClassifierName(ClassifierKind kind);
ClassifierKind ParseClassifierKind(const std::string& name);

// Training labels contain a single class, so no classifier can be fit. The
// evaluation harness marks the affected metric row instead of failing.
class DegradedDataError : public DataError {
 public:
  explicit DegradedDataError(const std::string& message)
      : DataError(message) {}
};

// A fitted binary classifier. Scores are P(label = 1) in [0, 1].
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ClassifierKind kind() const = 0;
  virtual double Score(std::span<const double> row) const = 0;
  std::vector<double> ScoreAll(const Matrix& x) const;
};

struct TreeConfig {
  int max_depth = 8;
  std::size_t min_leaf = 5;
  // Features drawn per split; 0 means all of them.
  std::size_t max_features = 0;
};

struct ForestConfig {
  int trees = 50;
  // max_features == 0 here means floor(sqrt(n_features)).
  TreeConfig tree;
};

struct AdaBoostConfig {
  int rounds = 50;
};

struct MlpConfig {
  std::size_t hidden = 64;
  ad::AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  int epochs = 200;
  std::size_t batch = 64;
  // Stop once the epoch loss has not improved by min_delta for `patience`
  // consecutive epochs.
  int patience = 10;
  double min_delta = 1e-4;
};

struct DownstreamConfig {
  models::LogRegConfig logreg;
  TreeConfig tree;
  ForestConfig forest;
  AdaBoostConfig adaboost;
  MlpConfig mlp;
};

// CART with Gini impurity. Leaves score the positive fraction of their rows.
class DecisionTree : public Classifier {
 public:
  // `rows` selects (possibly repeated) training rows of x.
  static DecisionTree Fit(const Matrix& x, std::span<const int> y,
                          std::span<const std::size_t> rows,
                          const TreeConfig& config, Rng& rng);
  ClassifierKind kind() const override { return ClassifierKind::kDecisionTree; }
  double Score(std::span<const double> row) const override;
  int depth() const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    // -1 for leaves.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  int Grow(const Matrix& x, std::span<const int> y,
           std::vector<std::size_t>& rows, int depth, const TreeConfig& config,
           Rng& rng);
  std::vector<Node> nodes_;
};

// A depth-one decision on one feature: predicts `polarity` when
// x[feature] > threshold and -polarity otherwise.
struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;
  double alpha = 0.0;
  int Predict(std::span<const double> row) const {
    return row[feature] > threshold ? polarity : -polarity;
  }
};

// Discrete AdaBoost over stumps chosen by minimum weighted error. The score
// is the logistic link 1 / (1 + exp(-2 F(x))) of the weighted vote F.
class AdaBoost : public Classifier {
 public:
  static AdaBoost Fit(const Matrix& x, std::span<const int> y,
                      const AdaBoostConfig& config);
  ClassifierKind kind() const override { return ClassifierKind::kAdaBoost; }
  double Score(std::span<const double> row) const override;
  const std::vector<Stump>& stumps() const { return stumps_; }

 private:
  std::vector<Stump> stumps_;
};

// Throws DegradedDataError when y holds a single class and DataError on
// shape mismatches. Deterministic given seed.
std::unique_ptr<Classifier> FitClassifier(ClassifierKind kind, const Matrix& x,
                                          std::span<const int> y,
                                          std::uint64_t seed,
                                          const DownstreamConfig& config = {});

}  // namespace dpsynth::eval

#endif  // DPSYNTH_DOWNSTREAM_H_
