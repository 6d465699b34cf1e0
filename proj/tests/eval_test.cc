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

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "dpsynth/downstream.h"
#include "dpsynth/encoding.h"
#include "dpsynth/error.h"
#include "dpsynth/generator.h"
#include "dpsynth/metrics.h"
#include "dpsynth/schema.h"
#include "dpsynth/shards.h"
#include "dpsynth/tstr.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace dpsynth::eval {
namespace {

using tabular::EncodedMatrix;
using tabular::Provenance;

// Same ratio as the oracle's pair count, compared by cross-multiplication.
bool SameRational(const AurocCounts& a, const testing::PairCount& b) {
  return a.twice_wins_plus_ties * b.twice_pairs ==
         b.twice_wins_plus_ties * a.twice_pairs;
}

// Random instance with both classes and scores on a coarse grid, so ties
// are common.
void RandomInstance(std::mt19937_64& rng, std::size_t n,
                    std::vector<double>& scores, std::vector<int>& labels) {
  std::uniform_int_distribution<int> grid(0, 5), bit(0, 1);
  scores.resize(n);
  labels.resize(n);
  do {
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = grid(rng) / 4.0;
      labels[i] = bit(rng);
    }
  } while (std::count(labels.begin(), labels.end(), 1) == 0 ||
           std::count(labels.begin(), labels.end(), 0) == 0);
}

TEST(Auroc, DocumentedExamples) {
  EXPECT_EQ(Auroc(std::vector<double>{0.9, 0.8, 0.1, 0.2},
                  std::vector<int>{1, 1, 0, 0}),
            1.0);
  EXPECT_EQ(Auroc(std::vector<double>{0.9, 0.8, 0.7, 0.2},
                  std::vector<int>{1, 0, 1, 0}),
            0.75);
  const AurocCounts c = AurocRational(std::vector<double>{0.5, 0.5},
                                      std::vector<int>{1, 0});
  EXPECT_EQ(c.twice_wins_plus_ties, 1);
  EXPECT_EQ(c.twice_pairs, 2);
}

TEST(Auroc, UndefinedInputsAreRejected) {
  EXPECT_THROW(Auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
               DataError);
  EXPECT_THROW(Auroc(std::vector<double>{0.1}, std::vector<int>{1, 0}),
               DataError);
  EXPECT_THROW(Auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 2}),
               DataError);
  EXPECT_THROW(Auroc(std::vector<double>{std::nan(""), 0.2},
                     std::vector<int>{1, 0}),
               DataError);
}

TEST(Auroc, MatchesPairEnumerationExactly) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  std::vector<double> s;
  std::vector<int> y;
  for (int trial = 0; trial < 1000; ++trial) {
    RandomInstance(rng, size(rng), s, y);
    ASSERT_TRUE(SameRational(AurocRational(s, y),
                             testing::BruteForceAurocCounts(s, y)))
        << "trial " << trial;
  }
}

TEST(Auroc, ComplementSymmetryAndMonotoneInvariance) {
  std::mt19937_64 rng(7);
  std::vector<double> s;
  std::vector<int> y;
  for (int trial = 0; trial < 200; ++trial) {
    RandomInstance(rng, 10, s, y);
    const AurocCounts base = AurocRational(s, y);
    std::vector<double> flipped_s(s.size()), exp_s(s.size()),
        affine_s(s.size());
    std::vector<int> flipped_y(y.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      flipped_s[i] = 1.0 - s[i];
      flipped_y[i] = 1 - y[i];
      exp_s[i] = std::exp(s[i]);
      affine_s[i] = 3.0 * s[i] - 7.0;
    }
    const AurocCounts flipped = AurocRational(flipped_s, flipped_y);
    EXPECT_EQ(flipped.twice_wins_plus_ties * base.twice_pairs,
              base.twice_wins_plus_ties * flipped.twice_pairs);
    EXPECT_EQ(AurocRational(exp_s, y).twice_wins_plus_ties,
              base.twice_wins_plus_ties);
    EXPECT_EQ(AurocRational(affine_s, y).twice_wins_plus_ties,
              base.twice_wins_plus_ties);
  }
}

TEST(AveragePrecision, DocumentedExamples) {
  EXPECT_EQ(AveragePrecision(std::vector<double>{0.9, 0.8, 0.3, 0.1},
                             std::vector<int>{1, 1, 0, 0}, 0),
            1.0);
  EXPECT_NEAR(AveragePrecision(std::vector<double>{0.9, 0.8, 0.7},
                               std::vector<int>{1, 0, 1}, 0),
              5.0 / 6.0, 1e-15);
  EXPECT_THROW(AveragePrecision(std::vector<double>{0.9, 0.8},
                                std::vector<int>{0, 0}, 0),
               DataError);
}

TEST(AveragePrecision, MatchesEnumerationOnDistinctScores) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = u(rng);
      y[i] = bit(rng);
    }
    y[0] = 1;
    // Ranking by plain descending score; distinct scores make it unique.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    ASSERT_NEAR(AveragePrecision(s, y, trial),
                testing::EnumeratedAveragePrecision(y, order), 1e-12)
        << "trial " << trial;
  }
}

TEST(AveragePrecision, MatchesEnumerationUnderSeededTieOrder) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  std::vector<double> s;
  std::vector<int> y;
  for (int trial = 0; trial < 1000; ++trial) {
    RandomInstance(rng, size(rng), s, y);
    const std::vector<std::size_t> order = RankForPrecision(s, trial);
    std::vector<std::size_t> sorted_order = order;
    std::sort(sorted_order.begin(), sorted_order.end());
    for (std::size_t i = 0; i < sorted_order.size(); ++i) {
      ASSERT_EQ(sorted_order[i], i);
    }
    for (std::size_t r = 1; r < order.size(); ++r) {
      ASSERT_GE(s[order[r - 1]], s[order[r]]);
    }
    ASSERT_NEAR(AveragePrecision(s, y, trial),
                testing::EnumeratedAveragePrecision(y, order), 1e-12);
  }
}

TEST(AveragePrecision, TieOrderIsSeeded) {
  const std::vector<double> s(50, 0.5);
  EXPECT_EQ(RankForPrecision(s, 3), RankForPrecision(s, 3));
  EXPECT_NE(RankForPrecision(s, 3), RankForPrecision(s, 4));
}

// Mean AP of a constant score over 50 seeds, with round(p n) positives.
double ConstantScoreMeanAp(double p, bool swap) {
  const std::size_t n = 10000;
  const std::size_t positives = static_cast<std::size_t>(std::lround(p * n));
  std::vector<int> y(n, 0);
  for (std::size_t i = 0; i < positives; ++i) y[i] = 1;
  if (swap) {
    for (int& v : y) v = 1 - v;
  }
  const std::vector<double> s(n, 0.5);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    sum += AveragePrecision(s, y, seed);
  }
  return sum / 50.0;
}

TEST(AveragePrecision, ConstantScoresSitAtPrevalence) {
  for (double p : {0.06, 0.24, 0.30, 0.50}) {
    EXPECT_NEAR(ConstantScoreMeanAp(p, false), p, 0.02) << "p = " << p;
    EXPECT_NEAR(ConstantScoreMeanAp(p, true), 1.0 - p, 0.02) << "p = " << p;
  }
}

// Two well separated boxes in 2-D: label 1 iff x0 > 0.5, with margin.
void BoxData(std::size_t n, std::uint64_t seed, Matrix& x, std::vector<int>& y) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lo(0.0, 0.4), hi(0.6, 1.0),
      any(0.0, 1.0);
  x = Matrix(n, 2);
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 0) = y[i] ? hi(rng) : lo(rng);
    x(i, 1) = any(rng);
  }
}

double Accuracy(const Classifier& c, const Matrix& x,
                const std::vector<int>& y) {
  int hits = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    hits += (c.Score(x.row(i)) > 0.5 ? 1 : 0) == y[i];
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

// Two overlapping Gaussian classes, so the held-out comparison is not
// trivially perfect.
void NoisyData(std::size_t n, std::uint64_t seed, Matrix& x,
               std::vector<int>& y) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  x = Matrix(n, 5);
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t c = 0; c < 5; ++c) {
      x(i, c) = z(rng) + (c < 2 ? (y[i] ? 0.8 : -0.8) : 0.0);
    }
  }
}

TEST(DecisionTree, SeparatesBoxes) {
  Matrix x;
  std::vector<int> y;
  BoxData(400, 1, x, y);
  auto tree = FitClassifier(ClassifierKind::kDecisionTree, x, y, 1);
  EXPECT_GE(Accuracy(*tree, x, y), 0.98);
  const auto* t = dynamic_cast<const DecisionTree*>(tree.get());
  ASSERT_NE(t, nullptr);
  EXPECT_LE(t->depth(), 8);
}

TEST(DecisionTree, RespectsDepthAndLeafLimits) {
  Matrix x;
  std::vector<int> y;
  NoisyData(600, 2, x, y);
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  Rng rng(1);
  TreeConfig config;
  config.max_depth = 3;
  const DecisionTree shallow = DecisionTree::Fit(x, y, rows, config, rng);
  EXPECT_LE(shallow.depth(), 3);
  config.max_depth = 0;
  const DecisionTree stump = DecisionTree::Fit(x, y, rows, config, rng);
  EXPECT_EQ(stump.node_count(), 1u);
  EXPECT_DOUBLE_EQ(stump.Score(x.row(0)), 0.5);
}

TEST(RandomForest, HeldOutAccuracyAtLeastTreeMinusMargin) {
  Matrix x, xt;
  std::vector<int> y, yt;
  NoisyData(800, 3, x, y);
  NoisyData(2000, 4, xt, yt);
  auto tree = FitClassifier(ClassifierKind::kDecisionTree, x, y, 1);
  auto forest = FitClassifier(ClassifierKind::kRandomForest, x, y, 1);
  EXPECT_GE(Accuracy(*forest, xt, yt), Accuracy(*tree, xt, yt) - 0.02);

  Matrix bx, bxt;
  std::vector<int> by, byt;
  BoxData(400, 5, bx, by);
  BoxData(400, 6, bxt, byt);
  auto btree = FitClassifier(ClassifierKind::kDecisionTree, bx, by, 1);
  auto bforest = FitClassifier(ClassifierKind::kRandomForest, bx, by, 1);
  EXPECT_GE(Accuracy(*bforest, bxt, byt), Accuracy(*btree, bxt, byt) - 0.02);
}

TEST(AdaBoost, SingleStumpRecoversAThreshold) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(500, 1);
  std::vector<int> y(500);
  for (std::size_t i = 0; i < 500; ++i) {
    x(i, 0) = u(rng);
    y[i] = x(i, 0) > 0.3 ? 1 : 0;
  }
  const AdaBoost model = AdaBoost::Fit(x, y, AdaBoostConfig{1});
  ASSERT_EQ(model.stumps().size(), 1u);
  EXPECT_NEAR(model.stumps()[0].threshold, 0.3, 0.01);
  EXPECT_EQ(model.stumps()[0].polarity, 1);
  EXPECT_GE(Accuracy(model, x, y), 0.95);
}

TEST(AdaBoost, BoostingImprovesOnAStump) {
  Matrix x, xt;
  std::vector<int> y, yt;
  NoisyData(800, 9, x, y);
  NoisyData(2000, 10, xt, yt);
  const AdaBoost one = AdaBoost::Fit(x, y, AdaBoostConfig{1});
  const AdaBoost fifty = AdaBoost::Fit(x, y, AdaBoostConfig{50});
  EXPECT_LE(fifty.stumps().size(), 50u);
  EXPECT_GT(Auroc(fifty.ScoreAll(xt), yt), Auroc(one.ScoreAll(xt), yt));
}

TEST(Classifiers, AllKindsLearnASimpleProblem) {
  Matrix x, xt;
  std::vector<int> y, yt;
  NoisyData(600, 11, x, y);
  NoisyData(1000, 12, xt, yt);
  for (ClassifierKind kind : kAllClassifiers) {
    auto model = FitClassifier(kind, x, y, 3);
    EXPECT_EQ(model->kind(), kind);
    const std::vector<double> s = model->ScoreAll(xt);
    for (double v : s) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    EXPECT_GT(Auroc(s, yt), 0.8) << ClassifierName(kind);
    // Same seed, same model.
    EXPECT_EQ(FitClassifier(kind, x, y, 3)->ScoreAll(xt), s)
        << ClassifierName(kind);
  }
}

TEST(Classifiers, SingleClassTrainingIsDegraded) {
  Matrix x(10, 2, 0.5);
  std::vector<int> y(10, 1);
  for (ClassifierKind kind : kAllClassifiers) {
    EXPECT_THROW(FitClassifier(kind, x, y, 0), DegradedDataError);
  }
  EXPECT_THROW(FitClassifier(ClassifierKind::kLogReg, x, std::vector<int>(9, 1), 0),
               DataError);
}

TEST(Classifiers, NamesRoundTrip) {
  for (ClassifierKind kind : kAllClassifiers) {
    EXPECT_EQ(ParseClassifierKind(ClassifierName(kind)), kind);
  }
  EXPECT_THROW(ParseClassifierKind("svm"), ConfigError);
}

struct Split {
  EncodedMatrix train;
  EncodedMatrix test;
};

Split GaussianSplit() {
  const tabular::CsvTable table = testing::TwoGaussianTable(1000, 1.5, 3);
  tabular::SchemaOptions options;
  options.target = "label";
  options.positive_class = "1";
  auto schema = std::make_shared<const tabular::TableSchema>(
      tabular::InferSchema(table, options));
  const tabular::TableSplit split =
      tabular::StratifiedSplit(table, "label", 0.2, 1);
  return {tabular::Encode(split.train, schema),
          tabular::Encode(split.test, schema)};
}

EncodedMatrix AsSynthetic(const EncodedMatrix& m) {
  return EncodedMatrix(m.values(), m.schema_ptr(), Provenance::kSynthetic);
}

TstrConfig SmallConfig() {
  TstrConfig c;
  c.runs = 2;
  c.seed = 40;
  c.downstream.mlp.epochs = 30;
  return c;
}

TEST(Tstr, RealTrainingDataIsTheUpperBound) {
  const Split split = GaussianSplit();
  const TstrConfig config = SmallConfig();
  const TstrReport report =
      TstrEvaluate(FromTable(AsSynthetic(split.train)), split.test, config);
  const auto& schema = split.train.schema();
  const Matrix xr = tabular::FeaturesWithoutTarget(split.train.values(), schema);
  const std::vector<int> yr = tabular::TargetLabels(split.train.values(), schema);
  const Matrix xt = tabular::FeaturesWithoutTarget(split.test.values(), schema);
  const std::vector<int> yt = tabular::TargetLabels(split.test.values(), schema);
  double real_sum = 0.0;
  int count = 0;
  for (int run = 0; run < config.runs; ++run) {
    for (ClassifierKind kind : config.classifiers) {
      real_sum += Auroc(FitClassifier(kind, xr, yr, config.seed + run,
                                      config.downstream)
                            ->ScoreAll(xt),
                        yt);
      ++count;
    }
  }
  EXPECT_GE(report.overall.auroc, real_sum / count - 0.02);
  EXPECT_GT(report.overall.auroc, 0.8);
}

TEST(Tstr, ShuffledLabelsScoreAtChance) {
  // Each run draws a fresh label permutation; a single permutation of well
  // clustered data can land far from 0.5 in either direction.
  const Split split = GaussianSplit();
  const auto schema = split.train.schema_ptr();
  const std::size_t target = schema->Offset(schema->TargetIndex());
  const SyntheticSource source = [&](int, std::uint64_t run_seed) {
    Matrix shuffled = split.train.values();
    std::vector<double> column(shuffled.rows());
    for (std::size_t r = 0; r < shuffled.rows(); ++r) {
      column[r] = shuffled(r, target);
    }
    std::mt19937_64 rng(run_seed);
    std::shuffle(column.begin(), column.end(), rng);
    for (std::size_t r = 0; r < shuffled.rows(); ++r) {
      shuffled(r, target) = column[r];
    }
    return EncodedMatrix(shuffled, schema, Provenance::kSynthetic);
  };
  TstrConfig config = SmallConfig();
  config.runs = 20;
  const TstrReport report = TstrEvaluate(source, split.test, config);
  EXPECT_NEAR(report.overall.auroc, 0.5, 0.05);
}

TEST(Tstr, MeansAreMeansOfTheirRows) {
  const Split split = GaussianSplit();
  const TstrReport report =
      TstrEvaluate(FromTable(AsSynthetic(split.train)), split.test, SmallConfig());
  ASSERT_EQ(report.rows.size(), 2u * kAllClassifiers.size());
  double all_a = 0.0, all_p = 0.0;
  for (const MeanRow& m : report.means) {
    double a = 0.0, p = 0.0;
    int n = 0;
    for (const MetricRow& r : report.rows) {
      if (r.classifier != m.classifier) continue;
      a += r.auroc;
      p += r.aucpr;
      ++n;
    }
    EXPECT_EQ(n, m.included);
    EXPECT_NEAR(m.auroc, a / n, 1e-12);
    EXPECT_NEAR(m.aucpr, p / n, 1e-12);
    all_a += a;
    all_p += p;
  }
  EXPECT_NEAR(report.overall.auroc, all_a / report.rows.size(), 1e-12);
  EXPECT_NEAR(report.overall.aucpr, all_p / report.rows.size(), 1e-12);
}

TEST(Tstr, ReportJsonRoundTripsAndValidates) {
  const Split split = GaussianSplit();
  TstrReport report =
      TstrEvaluate(FromTable(AsSynthetic(split.train)), split.test, SmallConfig());
  report.epsilon = 4.0;
  report.delta = 1e-5;
  const nlohmann::json j = report.ToJson();
  EXPECT_NO_THROW(ValidateReportJson(j));
  EXPECT_EQ(TstrReport::FromJson(j).ToJson(), j);

  nlohmann::json broken = j;
  broken["rows"][0].erase("auroc");
  EXPECT_THROW(ValidateReportJson(broken), DataError);
  broken = j;
  broken["format"] = "something-else";
  EXPECT_THROW(ValidateReportJson(broken), DataError);

  const std::string csv = report.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "classifier,run,seed,valid,auroc,aucpr");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'),
            static_cast<long>(1 + report.rows.size() + report.means.size() + 1));
}

TEST(Tstr, DegradedRunsAreMarkedAndOptionallyExcluded) {
  const Split split = GaussianSplit();
  const auto& schema = split.train.schema();
  Matrix one_class = split.train.values();
  const std::size_t target = schema.Offset(schema.TargetIndex());
  for (std::size_t r = 0; r < one_class.rows(); ++r) {
    one_class(r, target) = schema.PositiveCode();
  }
  const auto source = FromTable(
      EncodedMatrix(one_class, split.train.schema_ptr(), Provenance::kSynthetic));
  TstrConfig config = SmallConfig();
  const TstrReport lenient = TstrEvaluate(source, split.test, config);
  for (const MetricRow& r : lenient.rows) {
    EXPECT_FALSE(r.valid);
    EXPECT_FALSE(r.note.empty());
    EXPECT_EQ(r.auroc, 0.5);
  }
  EXPECT_EQ(lenient.overall.included, static_cast<int>(lenient.rows.size()));

  config.strict = true;
  const TstrReport strict = TstrEvaluate(source, split.test, config);
  EXPECT_EQ(strict.overall.included, 0);
  EXPECT_TRUE(std::isnan(strict.overall.auroc));
  const nlohmann::json j = strict.ToJson();
  EXPECT_TRUE(j["overall"]["auroc"].is_null());
  EXPECT_NO_THROW(ValidateReportJson(j));
}

TEST(Tstr, ConfigContracts) {
  TstrConfig c;
  c.runs = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  EXPECT_THROW(TstrConfig::FromJson({{"runz", 2}}), ConfigError);
  EXPECT_THROW(TstrConfig::FromJson({{"classifiers", {"svm"}}}), ConfigError);
  const TstrConfig back = TstrConfig::FromJson(SmallConfig().ToJson());
  EXPECT_EQ(back.ToJson(), SmallConfig().ToJson());
}

TEST(Tstr, GeneratorSourceIsSeededPerRun) {
  const Split split = GaussianSplit();
  Rng init(1);
  models::GeneratorConfig gc;
  gc.hidden = 16;
  models::Generator gen(split.train.schema_ptr(), gc, init);
  const SyntheticSource source = FromGenerator(gen, 50);
  const EncodedMatrix a = source(0, 7), b = source(0, 7), c = source(1, 8);
  EXPECT_EQ(a.provenance(), Provenance::kSynthetic);
  EXPECT_EQ(a.rows(), 50u);
  EXPECT_TRUE(a.values() == b.values());
  EXPECT_FALSE(a.values() == c.values());
  EXPECT_THROW(FromGenerator(gen, 0), ConfigError);
}

TEST(LabelSwapAudit, UninformativeSyntheticDataTracksPrevalence) {
  // Constant synthetic features: the linear and tree-based classifiers score
  // the test set with a constant, so AP sits at the positive-class
  // prevalence on each side. (The MLP is left out: its first layer never
  // moves from its random start on constant inputs.)
  const tabular::CsvTable table = testing::BreastLikeTable();
  tabular::SchemaOptions options;
  options.target = "class";
  options.positive_class = "recurrence-events";
  auto schema = std::make_shared<const tabular::TableSchema>(
      tabular::InferSchema(table, options));
  const EncodedMatrix real = tabular::Encode(table, schema);
  Matrix flat(real.rows(), real.width());
  const std::size_t target = schema->Offset(schema->TargetIndex());
  for (std::size_t r = 0; r < real.rows(); ++r) {
    flat(r, target) = real.values()(r, target);
  }
  TstrConfig config = SmallConfig();
  config.runs = 5;
  config.classifiers = {ClassifierKind::kLogReg, ClassifierKind::kDecisionTree,
                        ClassifierKind::kRandomForest, ClassifierKind::kAdaBoost};
  const AuditReport audit = LabelSwapAudit(
      FromTable(EncodedMatrix(flat, schema, Provenance::kSynthetic)), real,
      config);
  const double p = 68.0 / 286.0;
  EXPECT_NEAR(audit.original.test_prevalence, p, 1e-12);
  EXPECT_NEAR(audit.swapped.test_prevalence, 1.0 - p, 1e-12);
  EXPECT_EQ(audit.original.positive_class, "recurrence-events");
  EXPECT_EQ(audit.swapped.positive_class, "no-recurrence-events");
  EXPECT_NEAR(audit.original.overall.aucpr, p, 0.05);
  EXPECT_NEAR(audit.swapped.overall.aucpr, 1.0 - p, 0.05);
  EXPECT_NEAR(audit.original.overall.auroc, 0.5, 1e-12);

  const nlohmann::json j = audit.ToJson();
  EXPECT_NO_THROW(ValidateReportJson(j));
  EXPECT_EQ(j["chance_ap"]["swapped"], audit.swapped.test_prevalence);
  const std::string plot = audit.ToPlotCsv();
  EXPECT_EQ(plot.substr(0, plot.find('\n')),
            "panel,positive_class,classifier,auroc,aucpr,chance_ap");
}

TEST(LabelSwapAudit, InversionWithScoreComplementKeepsAuroc) {
  const std::vector<double> s = {0.9, 0.1, 0.4, 0.4, 0.7, 0.2};
  const std::vector<int> y = {1, 0, 1, 0, 0, 1};
  std::vector<double> cs(s.size());
  std::vector<int> cy(y.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    cs[i] = 1.0 - s[i];
    cy[i] = 1 - y[i];
  }
  EXPECT_DOUBLE_EQ(Auroc(s, y), Auroc(cs, cy));
}

}  // namespace
}  // namespace dpsynth::eval
