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


#ifndef BTEL_EVAL_H_
#define BTEL_EVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btel/dataset.h"
#include "btel/model_io.h"
#include "btel/regions.h"
#include "btel/seqfilter.h"
#include "btel/tree.h"

namespace btel {

// Squared-l2 nearest database row, ties to the lowest index.
std::uint64_t BruteForceNN(MatrixView database, std::span<const float> q);

struct RecallCurve {
  std::vector<std::int64_t> tolerances;  // frames
  std::vector<double> recalls;
  double frames_to_meters = kDefaultMetersPerFrame;

  double At(std::int64_t tolerance) const;
};

// recall(t) = fraction of queries with |pred - gt| <= t. Ground truth must be
// non-negative.
RecallCurve ComputeRecallCurve(std::span<const std::int64_t> predictions,
                               std::span<const std::int64_t> ground_truth,
                               std::span<const std::int64_t> tolerances,
                               double meters_per_frame = kDefaultMetersPerFrame);

// Expected recall@t of predictions drawn uniformly from [0, n) against ground
// truth uniform over [0, n).
double RandomBaselineRecall(std::uint64_t n, std::int64_t tolerance);

std::vector<std::int64_t> DefaultTolerances();

struct StorageEntry {
  std::string component;
  std::uint64_t bytes = 0;
};

struct StorageReport {
  std::vector<StorageEntry> entries;

  std::uint64_t Total() const;
  // Sum over entries whose name starts with |prefix|.
  std::uint64_t Sum(const std::string& prefix) const;
};

// Byte breakdown of the canonical file; sums to ModelSizeBytes exactly.
StorageReport ReportStorage(const Model& model);

struct ExperimentConfig {
  // Data: either files or synthetic parameters.
  std::optional<std::string> database_path;
  std::optional<std::string> queries_path;
  std::optional<std::string> ground_truth_path;
  std::optional<SyntheticParams> synthetic;
  // A pre-trained model skips training.
  std::optional<std::string> model_path;

  TrainConfig train;
  std::uint32_t regions = 1;
  SegmentationMethod segmentation = SegmentationMethod::kChangepoint;
  std::optional<std::uint64_t> budget_bytes;

  int filter_window = 0;
  FilterHistory filter_history = FilterHistory::kOutputs;
  std::vector<std::int64_t> tolerances = DefaultTolerances();
  bool nn_baseline = true;
  // Wall-clock columns are zero unless enabled, keeping output reproducible.
  bool record_timings = false;
  std::uint64_t seed = 0;
};

struct ResultRow {
  std::string method;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  std::size_t d_prime = 0;
  std::uint32_t r = 0;
  std::uint64_t budget_bytes = 0;
  std::uint64_t model_bytes = 0;
  int filter_window = 0;
  std::int64_t tolerance_frames = 0;
  double tolerance_meters = 0.0;
  double recall = 0.0;
  double train_seconds = 0.0;
  double query_microseconds_mean = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  StorageReport storage;
  std::uint64_t model_bytes = 0;
  std::optional<BudgetPlan> budget_plan;
  std::vector<std::int64_t> predictions;           // raw
  std::vector<std::int64_t> filtered_predictions;  // empty without filter
};

// Throws ConfigError naming the offending field.
void ValidateExperiment(const ExperimentConfig& config);

// Trains (or loads) a model, evaluates recall curves with and without
// sequence filtering plus the nearest-neighbour baseline.
ExperimentResult RunExperiment(const ExperimentConfig& config);

// Parses the JSON config form; unknown keys are rejected.
ExperimentConfig ExperimentConfigFromJson(const std::string& text);
std::string ExperimentConfigToJson(const ExperimentConfig& config);

inline constexpr const char* kResultsCsvHeader =
    "method,N,d,d_prime,r,budget_bytes,model_bytes,filter_window,"
    "tolerance_frames,tolerance_meters,recall,train_seconds,"
    "query_microseconds_mean,seed";

std::string ResultsToCsv(const ExperimentResult& result);
std::string ResultsToJson(const ExperimentResult& result);

}  // namespace btel

#endif  // BTEL_EVAL_H_
