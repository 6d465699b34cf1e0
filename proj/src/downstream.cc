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

#include "dpsynth/downstream.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dpsynth/autodiff.h"
#include "dpsynth/layers.h"

namespace dpsynth::eval {
namespace {

void CheckTrainingSet(const Matrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw DataError("classifier: " + std::to_string(x.rows()) + " rows but " +
                    std::to_string(y.size()) + " labels");
  }
  if (x.rows() == 0 || x.cols() == 0) {
    throw DataError("classifier: empty training set");
  }
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("classifier: labels must be 0 or 1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == y.size()) {
    throw DegradedDataError("training labels contain a single class (" +
                            std::to_string(pos) + " positives of " +
                            std::to_string(y.size()) + ")");
  }
}

void CheckWidth(std::span<const double> row, std::size_t width) {
  if (row.size() != width) {
    throw DataError("classifier expects width " + std::to_string(width) +
                    ", got " + std::to_string(row.size()));
  }
}

// Gini impurity times node size: 2 * pos * neg / n.
double WeightedGini(double pos, double n) {
  return n > 0.0 ? 2.0 * pos * (n - pos) / n : 0.0;
}

double Midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

class LogRegClassifier : public Classifier {
 public:
  explicit LogRegClassifier(models::LinearModel model)
      : model_(std::move(model)) {}
  ClassifierKind kind() const override { return ClassifierKind::kLogReg; }
  double Score(std::span<const double> row) const override {
    return ad::SigmoidScalar(model_.Logit(row));
  }

 private:
  models::LinearModel model_;
};

class Forest : public Classifier {
 public:
  explicit Forest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}
  ClassifierKind kind() const override { return ClassifierKind::kRandomForest; }
  double Score(std::span<const double> row) const override {
    double s = 0.0;
    for (const DecisionTree& t : trees_) s += t.Score(row);
    return s / static_cast<double>(trees_.size());
  }

 private:
  std::vector<DecisionTree> trees_;
};

// One relu hidden layer on standardized inputs, trained with minibatch Adam
// on BCE.
class MlpClassifier : public Classifier {
 public:
  static std::unique_ptr<MlpClassifier> Fit(const Matrix& x,
                                            std::span<const int> y,
                                            const MlpConfig& config, Rng& rng);
  ClassifierKind kind() const override { return ClassifierKind::kMlp; }
  double Score(std::span<const double> row) const override;

 private:
  std::vector<double> mean_, scale_;
  Matrix w1_, b1_, w2_, b2_;
};

std::unique_ptr<MlpClassifier> MlpClassifier::Fit(const Matrix& x,
                                                  std::span<const int> y,
                                                  const MlpConfig& config,
                                                  Rng& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  auto model = std::make_unique<MlpClassifier>();
  model->mean_.assign(d, 0.0);
  model->scale_.assign(d, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) model->mean_[c] += x(r, c);
  for (double& m : model->mean_) m /= static_cast<double>(n);
  for (std::size_t c = 0; c < d; ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = x(r, c) - model->mean_[c];
      var += dv * dv;
    }
    var /= static_cast<double>(n);
    model->scale_[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  Matrix z(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      z(r, c) = (x(r, c) - model->mean_[c]) / model->scale_[c];

  ad::ParamStore store;
  const ad::Linear l1 = ad::MakeLinear(store, "mlp.hidden", d, config.hidden,
                                       ad::Init::kKaimingUniform, true, rng);
  const ad::Linear l2 = ad::MakeLinear(store, "mlp.out", config.hidden, 1,
                                       ad::Init::kXavierUniform, true, rng);
  ad::Adam opt(config.adam);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < config.epochs && stale < config.patience;
       ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch) {
      const std::size_t m = std::min(config.batch, n - start);
      const std::span<const std::size_t> idx(order.data() + start, m);
      Matrix targets(m, 1);
      for (std::size_t i = 0; i < m; ++i) targets(i, 0) = y[idx[i]];
      ad::Tape t;
      store.ZeroGrad();
      ad::Var h = ad::Relu(
          t, ad::ApplyLinear(t, store, l1, t.Constant(z.SelectRows(idx)), true));
      ad::Var loss =
          ad::BceWithLogits(t, ad::ApplyLinear(t, store, l2, h, true), targets);
      epoch_loss += t.value(loss)(0, 0) * static_cast<double>(m);
      t.Backward(loss);
      opt.Step(store);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("mlp classifier: non-finite loss at epoch " +
                         std::to_string(epoch));
    }
    if (epoch_loss < best - config.min_delta) {
      best = epoch_loss;
      stale = 0;
    } else {
      ++stale;
    }
  }
  model->w1_ = store[l1.weight].value;
  model->b1_ = store[*l1.bias].value;
  model->w2_ = store[l2.weight].value;
  model->b2_ = store[*l2.bias].value;
  return model;
}

double MlpClassifier::Score(std::span<const double> row) const {
  CheckWidth(row, mean_.size());
  const std::size_t hidden = w1_.cols();
  double logit = b2_(0, 0);
  for (std::size_t j = 0; j < hidden; ++j) {
    double a = b1_(0, j);
    for (std::size_t c = 0; c < row.size(); ++c) {
      a += (row[c] - mean_[c]) / scale_[c] * w1_(c, j);
    }
    if (a > 0.0) logit += a * w2_(j, 0);
  }
  return ad::SigmoidScalar(logit);
}

}  // namespace

std::string ClassifierName(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLogReg:
      return "logreg";
    case ClassifierKind::kDecisionTree:
      return "decision_tree";
    case ClassifierKind::kRandomForest:
      return "random_forest";
    case ClassifierKind::kAdaBoost:
      return "adaboost";
    case ClassifierKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

ClassifierKind ParseClassifierKind(const std::string& name) {
  for (ClassifierKind k : kAllClassifiers) {
    if (ClassifierName(k) == name) return k;
  }
  throw ConfigError("unknown classifier '" + name +
                    "' (expected logreg, decision_tree, random_forest, "
                    "adaboost or mlp)");
}

std::vector<double> Classifier::ScoreAll(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = Score(x.row(r));
  return out;
}

DecisionTree DecisionTree::Fit(const Matrix& x, std::span<const int> y,
                               std::span<const std::size_t> rows,
                               const TreeConfig& config, Rng& rng) {
  if (rows.empty()) throw DataError("decision tree: no training rows");
  if (config.max_depth < 0 || config.min_leaf < 1) {
    throw ConfigError("decision tree: need max_depth >= 0 and min_leaf >= 1");
  }
  DecisionTree tree;
  std::vector<std::size_t> work(rows.begin(), rows.end());
  tree.Grow(x, y, work, 0, config, rng);
  return tree;
}

int DecisionTree::Grow(const Matrix& x, std::span<const int> y,
                       std::vector<std::size_t>& rows, int depth,
                       const TreeConfig& config, Rng& rng) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  const std::size_t n = rows.size();
  std::size_t pos = 0;
  for (std::size_t r : rows) pos += static_cast<std::size_t>(y[r]);
  nodes_[index].value = static_cast<double>(pos) / static_cast<double>(n);
  if (depth >= config.max_depth || pos == 0 || pos == n ||
      n < 2 * config.min_leaf) {
    return index;
  }

  const std::size_t d = x.cols();
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), 0);
  std::size_t n_features = d;
  if (config.max_features > 0 && config.max_features < d) {
    n_features = config.max_features;
    for (std::size_t i = 0; i < n_features; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (d - i));
      std::swap(features[i], features[j]);
    }
    std::sort(features.begin(), features.begin() + n_features);
  }

  const double parent = WeightedGini(static_cast<double>(pos),
                                     static_cast<double>(n));
  double best = parent;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<std::size_t> sorted(rows);
  for (std::size_t fi = 0; fi < n_features; ++fi) {
    const std::size_t f = features[fi];
    std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
      return x(a, f) < x(b, f);
    });
    std::size_t left_pos = 0;
    for (std::size_t i = 1; i < n; ++i) {
      left_pos += static_cast<std::size_t>(y[sorted[i - 1]]);
      const double lo = x(sorted[i - 1], f), hi = x(sorted[i], f);
      if (lo == hi || i < config.min_leaf || n - i < config.min_leaf) continue;
      const double impurity =
          WeightedGini(static_cast<double>(left_pos), static_cast<double>(i)) +
          WeightedGini(static_cast<double>(pos - left_pos),
                       static_cast<double>(n - i));
      if (impurity < best - 1e-12) {
        best = impurity;
        best_feature = static_cast<int>(f);
        best_threshold = Midpoint(lo, hi);
      }
    }
  }
  if (best_feature < 0) return index;

  std::vector<std::size_t> left, right;
  for (std::size_t r : rows) {
    (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();
  nodes_[index].feature = best_feature;
  nodes_[index].threshold = best_threshold;
  const int l = Grow(x, y, left, depth + 1, config, rng);
  const int r = Grow(x, y, right, depth + 1, config, rng);
  nodes_[index].left = l;
  nodes_[index].right = r;
  return index;
}

double DecisionTree::Score(std::span<const double> row) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    const Node& node = nodes_[i];
    if (static_cast<std::size_t>(node.feature) >= row.size()) {
      throw DataError("decision tree: row is narrower than the training data");
    }
    i = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[i].value;
}

int DecisionTree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes_[i].feature >= 0) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

AdaBoost AdaBoost::Fit(const Matrix& x, std::span<const int> y,
                       const AdaBoostConfig& config) {
  CheckTrainingSet(x, y);
  if (config.rounds < 1) throw ConfigError("adaboost: rounds must be >= 1");
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<std::vector<std::size_t>> sorted(d);
  for (std::size_t f = 0; f < d; ++f) {
    sorted[f].resize(n);
    std::iota(sorted[f].begin(), sorted[f].end(), 0);
    std::stable_sort(sorted[f].begin(), sorted[f].end(),
                     [&](std::size_t a, std::size_t b) {
                       return x(a, f) < x(b, f);
                     });
  }
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  constexpr double kMinError = 1e-12;
  AdaBoost model;
  for (int round = 0; round < config.rounds; ++round) {
    double total_pos = 0.0, total_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] ? total_pos : total_neg) += w[i];
    // Threshold below every value: all rows fall on the "greater" side.
    Stump best;
    best.feature = 0;
    best.threshold = x(sorted[0][0], 0) - 1.0;
    best.polarity = total_pos >= total_neg ? 1 : -1;
    double best_err = std::min(total_pos, total_neg);
    for (std::size_t f = 0; f < d; ++f) {
      double left_pos = 0.0, left_neg = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const std::size_t prev = sorted[f][i - 1];
        (y[prev] ? left_pos : left_neg) += w[prev];
        const double lo = x(prev, f), hi = x(sorted[f][i], f);
        if (lo == hi) continue;
        // polarity +1 predicts positive above the threshold.
        const double err_up = left_pos + (total_neg - left_neg);
        const double err_down = left_neg + (total_pos - left_pos);
        if (err_up < best_err - 1e-15) {
          best_err = err_up;
          best = Stump{f, Midpoint(lo, hi), 1, 0.0};
        }
        if (err_down < best_err - 1e-15) {
          best_err = err_down;
          best = Stump{f, Midpoint(lo, hi), -1, 0.0};
        }
      }
    }
    if (best_err >= 0.5 - 1e-12) {
      if (model.stumps_.empty()) model.stumps_.push_back(best);
      break;
    }
    const double err = std::max(best_err, kMinError);
    best.alpha = 0.5 * std::log((1.0 - err) / err);
    model.stumps_.push_back(best);
    if (best_err <= kMinError) break;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int s = y[i] ? 1 : -1;
      w[i] *= std::exp(-best.alpha * s * best.Predict(x.row(i)));
      norm += w[i];
    }
    for (double& v : w) v /= norm;
  }
  return model;
}

double AdaBoost::Score(std::span<const double> row) const {
  double f = 0.0;
  for (const Stump& s : stumps_) {
    if (s.feature >= row.size()) {
      throw DataError("adaboost: row is narrower than the training data");
    }
    f += s.alpha * s.Predict(row);
  }
  return ad::SigmoidScalar(2.0 * f);
}

std::unique_ptr<Classifier> FitClassifier(ClassifierKind kind, const Matrix& x,
                                          std::span<const int> y,
                                          std::uint64_t seed,
                                          const DownstreamConfig& config) {
  CheckTrainingSet(x, y);
  Rng rng = MakeRng(seed, Stream::kEval);
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  switch (kind) {
    case ClassifierKind::kLogReg: {
      std::vector<double> yd(y.begin(), y.end());
      return std::make_unique<LogRegClassifier>(
          models::FitLogisticRegression(x, yd, config.logreg).raw);
    }
    case ClassifierKind::kDecisionTree:
      return std::make_unique<DecisionTree>(
          DecisionTree::Fit(x, y, all, config.tree, rng));
    case ClassifierKind::kRandomForest: {
      if (config.forest.trees < 1) {
        throw ConfigError("random forest: trees must be >= 1");
      }
      TreeConfig tree = config.forest.tree;
      if (tree.max_features == 0) {
        tree.max_features = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::floor(std::sqrt(static_cast<double>(x.cols())))));
      }
      std::vector<DecisionTree> trees;
      trees.reserve(config.forest.trees);
      std::vector<std::size_t> bag(x.rows());
      for (int t = 0; t < config.forest.trees; ++t) {
        for (std::size_t& r : bag) {
          r = static_cast<std::size_t>(rng() % x.rows());
        }
        trees.push_back(DecisionTree::Fit(x, y, bag, tree, rng));
      }
      return std::make_unique<Forest>(std::move(trees));
    }
    case ClassifierKind::kAdaBoost:
      return std::make_unique<AdaBoost>(AdaBoost::Fit(x, y, config.adaboost));
    case ClassifierKind::kMlp:
      return MlpClassifier::Fit(x, y, config.mlp, rng);
  }
  throw ConfigError("unknown classifier kind");
}

}  // namespace dpsynth::eval
