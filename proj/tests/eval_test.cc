/*
 * Copyright 2026 The btel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "btel/eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "btel/error.h"
#include "json.hpp"
#include "test_util.h"

namespace btel {
namespace {

TEST(BruteForceNN, ExactRowAndTies) {
  const Matrix x = testing::RandomMatrix(20, 8, 1);
  EXPECT_EQ(BruteForceNN(x, x.row(5)), 5u);
  Matrix twins(3, 1, {1.0f, -1.0f, 1.0f});
  const std::vector<float> q = {0.0f};
  EXPECT_EQ(BruteForceNN(twins, q), 0u);
  const std::vector<float> wrong = {0.0f, 0.0f};
  EXPECT_THROW(BruteForceNN(twins, wrong), DimensionMismatch);
}

TEST(BruteForceNN, AgreesWithIndependentLoop) {
  const Matrix db = testing::RandomMatrix(300, 24, 2);
  const Matrix queries = testing::RandomMatrix(100, 24, 3);
  for (std::size_t i = 0; i < 100; ++i) {
    ASSERT_EQ(BruteForceNN(db, queries.row(i)), testing::NaiveNearest(db, queries.row(i)));
  }
}

TEST(RecallCurve, PerfectAndShifted) {
  const std::vector<std::int64_t> gt = {0, 10, 20, 30};
  const std::vector<std::int64_t> tolerances = {0, 6, 7, 8};
  const RecallCurve perfect = ComputeRecallCurve(gt, gt, tolerances);
  EXPECT_EQ(perfect.At(0), 1.0);
  std::vector<std::int64_t> shifted = {7, 3, 27, 23};
  const RecallCurve step = ComputeRecallCurve(shifted, gt, tolerances);
  EXPECT_EQ(step.At(0), 0.0);
  EXPECT_EQ(step.At(6), 0.0);
  EXPECT_EQ(step.At(7), 1.0);
  EXPECT_EQ(step.At(8), 1.0);
  EXPECT_THROW(step.At(99), ConfigError);
}

TEST(RecallCurve, MonotoneAndBounded) {
  std::mt19937_64 rng(4);
  std::vector<std::int64_t> preds(500), gt(500);
  for (std::size_t i = 0; i < 500; ++i) {
    gt[i] = i;
    preds[i] = rng() % 500;
  }
  const RecallCurve c = ComputeRecallCurve(preds, gt, DefaultTolerances());
  for (std::size_t k = 0; k < c.recalls.size(); ++k) {
    EXPECT_GE(c.recalls[k], 0.0);
    EXPECT_LE(c.recalls[k], 1.0);
    if (k) EXPECT_GE(c.recalls[k], c.recalls[k - 1]);
  }
}

TEST(RecallCurve, RejectsMismatchedInput) {
  const std::vector<std::int64_t> a = {1, 2}, b = {1};
  const std::vector<std::int64_t> t = {0};
  EXPECT_THROW(ComputeRecallCurve(a, b, t), ConfigError);
}

TEST(RandomBaseline, EdgeAwareFormula) {
  // Interior queries hit 2t + 1 indices; edges hit fewer.
  EXPECT_NEAR(RandomBaselineRecall(1000, 5), 0.011, 0.0001);
  EXPECT_LT(RandomBaselineRecall(1000, 5), 11.0 / 1000);
  EXPECT_DOUBLE_EQ(RandomBaselineRecall(10, 0), 0.1);
  EXPECT_DOUBLE_EQ(RandomBaselineRecall(10, 100), 1.0);
}

TEST(RandomBaseline, BinomialCheckOfRandomPredictions) {
  const std::uint64_t n = 1000;
  const std::size_t trials = 20000;
  std::mt19937_64 rng(5);
  std::vector<std::int64_t> preds(trials), gt(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    gt[i] = rng() % n;
    preds[i] = rng() % n;
  }
  const std::vector<std::int64_t> t = {5};
  const double observed = ComputeRecallCurve(preds, gt, t).At(5);
  const double p = 11.0 / n;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(observed, p, 3 * sigma);
}

TEST(StorageReport, SumsToModelSize) {
  DescriptorSet ds;
  ds.descriptors = testing::SeparableMatrix(50, 12, 6);
  const Model m = TrainRegionized(ds, 3, SegmentationMethod::kUniform, TrainConfig{});
  const StorageReport report = ReportStorage(m);
  EXPECT_EQ(report.Total(), ModelSizeBytes(m));
  EXPECT_EQ(report.Total(), SerializeModel(m).size());
  EXPECT_GT(report.Sum("router"), 0u);

  const Model single = TrainRegionized(ds, 1, SegmentationMethod::kUniform, TrainConfig{});
  EXPECT_EQ(ReportStorage(single).Sum("router"), 0u);

  const Model full = TrainFull(ds.descriptors, TrainConfig{});
  EXPECT_EQ(ReportStorage(full).Total(), SerializeModel(full).size());
}

TEST(StorageReport, LevelBytesScaleWithReducedDimension) {
  DescriptorSet ds;
  ds.descriptors = testing::SeparableMatrix(40, 64, 7);
  auto level_bytes = [&](std::size_t d_prime) {
    TrainConfig c;
    c.d_prime = d_prime;
    c.svm.epochs = 1;
    const StorageReport r = ReportStorage(AsRegionized(TrainCompressed(ds, c)));
    return r.Sum("region[0].level[1].");
  };
  // 9 + 8 d' bytes per level: the variable part doubles exactly.
  EXPECT_EQ(level_bytes(20) - 9, 2 * (level_bytes(10) - 9));
}

ExperimentConfig SmallSynthetic() {
  ExperimentConfig c;
  c.synthetic = SyntheticParams{.n = 200, .d = 32, .walk_sigma = 0.3, .query_sigma = 0.02, .seed = 1};
  c.train.dim_ratio = 0.5;
  c.regions = 2;
  c.filter_window = 3;
  c.tolerances = {0, 1, 5};
  return c;
}

TEST(RunExperiment, RowsAndDeterminism) {
  const ExperimentConfig c = SmallSynthetic();
  const ExperimentResult a = RunExperiment(c);
  const ExperimentResult b = RunExperiment(c);
  EXPECT_EQ(ResultsToCsv(a), ResultsToCsv(b));
  EXPECT_EQ(ResultsToJson(a), ResultsToJson(b));
  // model, model + filter, NN baseline; three tolerances each
  EXPECT_EQ(a.rows.size(), 9u);
  EXPECT_EQ(a.rows[0].method, "BTE-C");
  EXPECT_EQ(a.rows[3].method, "BTE-C+SF");
  EXPECT_EQ(a.rows[6].method, "NN");
  EXPECT_EQ(a.rows[8].recall, 1.0);
  EXPECT_EQ(a.model_bytes, a.storage.Total());
  EXPECT_EQ(ResultsToCsv(a).substr(0, std::string(kResultsCsvHeader).size()),
            kResultsCsvHeader);
}

TEST(RunExperiment, BudgetHonored) {
  ExperimentConfig c = SmallSynthetic();
  c.budget_bytes = 3000;
  const ExperimentResult r = RunExperiment(c);
  ASSERT_TRUE(r.budget_plan.has_value());
  EXPECT_LE(r.model_bytes, 3000u);
  EXPECT_EQ(r.model_bytes, r.budget_plan->predicted_bytes);
}

TEST(RunExperiment, JsonMirrorsCsv) {
  const ExperimentResult r = RunExperiment(SmallSynthetic());
  const auto j = nlohmann::json::parse(ResultsToJson(r));
  EXPECT_EQ(j["format_version"], 1);
  ASSERT_EQ(j["rows"].size(), r.rows.size());
  EXPECT_EQ(j["rows"][0]["method"], "BTE-C");
  EXPECT_TRUE(j["metadata"].contains("config"));
}

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig c = SmallSynthetic();
  c.filter_history = FilterHistory::kRaw;
  const std::string text = ExperimentConfigToJson(c);
  EXPECT_EQ(nlohmann::json::parse(text)["filter_history"], "raw");
  EXPECT_EQ(ExperimentConfigToJson(ExperimentConfigFromJson(text)), text);
}

TEST(ExperimentConfig, ErrorsNameFields) {
  try {
    ExperimentConfigFromJson(R"({"regions": 2, "bogus": 1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos) << e.what();
  }
  ExperimentConfig c;
  c.queries_path = "q.btel";
  c.database_path = "db.btel";
  try {
    ValidateExperiment(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ground_truth"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace btel
