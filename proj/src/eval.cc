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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "btel/error.h"
#include "btel/seqfilter.h"
#include "json.hpp"

namespace btel {
namespace {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string Fixed(double value, int digits = 6) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

const char* SchemeName(Scheme s) { return s == Scheme::kFull ? "full" : "compressed"; }
const char* SegmentationName(SegmentationMethod m) {
  return m == SegmentationMethod::kUniform ? "uniform" : "changepoint";
}

void AddClassifierEntries(StorageReport& report, const std::string& prefix,
                          const BinaryClassifier& c) {
  if (std::holds_alternative<ConstantClassifier>(c)) {
    report.entries.push_back({prefix + ".constant", model_format::kConstantLevelBytes});
    return;
  }
  const std::uint64_t dim = std::get<Hyperplane>(c).dim();
  report.entries.push_back({prefix + ".hyperplane", 1 + 4 + dim * 4 + 4});
  report.entries.push_back({prefix + ".columns", dim * 4});
}

}  // namespace

std::uint64_t BruteForceNN(MatrixView database, std::span<const float> q) {
  if (q.size() != database.cols()) {
    throw DimensionMismatch("query has dimension " + std::to_string(q.size()) +
                            ", database has " + std::to_string(database.cols()));
  }
  if (database.rows() == 0) throw ConfigError("BruteForceNN: empty database");
  std::uint64_t best = 0;
  double best_distance = 0.0;
  for (std::size_t i = 0; i < database.rows(); ++i) {
    const auto row = database.row(i);
    double distance = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = static_cast<double>(q[j]) - row[j];
      distance += diff * diff;
    }
    if (i == 0 || distance < best_distance) {
      best = i;
      best_distance = distance;
    }
  }
  return best;
}

double RecallCurve::At(std::int64_t tolerance) const {
  for (std::size_t k = 0; k < tolerances.size(); ++k) {
    if (tolerances[k] == tolerance) return recalls[k];
  }
  throw ConfigError("tolerance " + std::to_string(tolerance) + " not on the curve");
}

RecallCurve ComputeRecallCurve(std::span<const std::int64_t> predictions,
                               std::span<const std::int64_t> ground_truth,
                               std::span<const std::int64_t> tolerances,
                               double meters_per_frame) {
  if (predictions.size() != ground_truth.size()) {
    throw ConfigError("recall: " + std::to_string(predictions.size()) +
                      " predictions but " + std::to_string(ground_truth.size()) +
                      " ground-truth entries");
  }
  if (predictions.empty()) throw ConfigError("recall: no queries");
  std::vector<std::int64_t> errors(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (ground_truth[i] < 0) {
      throw ConfigError("recall: ground truth of query " + std::to_string(i) + " is unknown");
    }
    errors[i] = std::llabs(predictions[i] - ground_truth[i]);
  }
  std::sort(errors.begin(), errors.end());
  RecallCurve curve;
  curve.frames_to_meters = meters_per_frame;
  for (std::int64_t t : tolerances) {
    if (t < 0) throw ConfigError("recall: negative tolerance " + std::to_string(t));
    const auto hits = std::upper_bound(errors.begin(), errors.end(), t) - errors.begin();
    curve.tolerances.push_back(t);
    curve.recalls.push_back(static_cast<double>(hits) /
                            static_cast<double>(errors.size()));
  }
  return curve;
}

double RandomBaselineRecall(std::uint64_t n, std::int64_t tolerance) {
  if (n == 0) throw ConfigError("RandomBaselineRecall: n must be >= 1");
  const auto t = static_cast<std::uint64_t>(std::max<std::int64_t>(tolerance, 0));
  double hits = 0.0;
  for (std::uint64_t g = 0; g < n; ++g) {
    const std::uint64_t lo = g >= t ? g - t : 0;
    const std::uint64_t hi = std::min(g + t, n - 1);
    hits += static_cast<double>(hi - lo + 1);
  }
  return hits / (static_cast<double>(n) * static_cast<double>(n));
}

std::vector<std::int64_t> DefaultTolerances() {
  std::vector<std::int64_t> t(81);
  for (std::int64_t k = 0; k <= 80; ++k) t[k] = k;
  return t;
}

std::uint64_t StorageReport::Total() const {
  std::uint64_t total = 0;
  for (const auto& e : entries) total += e.bytes;
  return total;
}

std::uint64_t StorageReport::Sum(const std::string& prefix) const {
  std::uint64_t total = 0;
  for (const auto& e : entries) {
    if (e.component.compare(0, prefix.size(), prefix) == 0) total += e.bytes;
  }
  return total;
}

StorageReport ReportStorage(const Model& model) {
  StorageReport report;
  report.entries.push_back({"header", model_format::kHeaderBytes});
  if (const auto* full = std::get_if<FullTreeModel>(&model)) {
    report.entries.push_back({"segmentation", model_format::BoundaryBytes(1)});
    report.entries.push_back({"router", 0});
    report.entries.push_back(
        {"tree.header", model_format::kTreeHeaderBytes + model_format::kNodeCountBytes});
    for (const auto& [node, h] : full->nodes) {
      const std::string prefix = "node[" + std::to_string(node) + "]";
      report.entries.push_back({prefix + ".id", model_format::kNodeIdBytes});
      AddClassifierEntries(report, prefix, h);
    }
    return report;
  }
  const auto& m = std::get<RegionizedModel>(model);
  const std::uint32_t r = m.num_regions();
  report.entries.push_back({"segmentation", model_format::BoundaryBytes(r)});
  report.entries.push_back({"router", model_format::RouterBytes(r, m.d)});
  for (std::uint32_t k = 0; k < r; ++k) {
    const std::string prefix = "region[" + std::to_string(k) + "]";
    report.entries.push_back({prefix + ".header", model_format::kTreeHeaderBytes});
    const auto& levels = m.trees[k].levels;
    for (std::size_t j = 0; j < levels.size(); ++j) {
      AddClassifierEntries(report, prefix + ".level[" + std::to_string(j + 1) + "]",
                           levels[j]);
    }
  }
  return report;
}

void ValidateExperiment(const ExperimentConfig& c) {
  const bool has_model = c.model_path.has_value();
  if (!c.synthetic && !c.database_path && !has_model) {
    throw ConfigError("config: one of 'database', 'synthetic' or 'model' is required");
  }
  if (c.synthetic && (c.database_path || c.queries_path)) {
    throw ConfigError("config: 'synthetic' cannot be combined with 'database'/'queries'");
  }
  if (!c.synthetic && !c.queries_path) throw ConfigError("config: 'queries' is required");
  if (c.queries_path && !c.ground_truth_path) {
    throw ConfigError("config: 'ground_truth' is required to evaluate recall");
  }
  if (c.synthetic && (c.synthetic->n == 0 || c.synthetic->d == 0)) {
    throw ConfigError("config: 'synthetic.n' and 'synthetic.d' must be >= 1");
  }
  if (!(c.train.dim_ratio > 0) || c.train.dim_ratio > 1) {
    throw ConfigError("config: 'dim_ratio' must lie in (0, 1]");
  }
  if (c.regions < 1) throw ConfigError("config: 'regions' must be >= 1");
  if (c.train.scheme == Scheme::kFull && c.regions != 1) {
    throw ConfigError("config: 'regions' must be 1 for the full scheme");
  }
  if (c.train.scheme == Scheme::kFull && c.budget_bytes) {
    throw ConfigError("config: 'budget_bytes' applies to the compressed scheme only");
  }
  if (c.filter_window < 0) throw ConfigError("config: 'filter_window' must be >= 0");
  if (c.tolerances.empty()) throw ConfigError("config: 'tolerances' must not be empty");
  for (std::int64_t t : c.tolerances) {
    if (t < 0) throw ConfigError("config: 'tolerances' must be >= 0");
  }
  if (!(c.train.svm.lambda > 0)) throw ConfigError("config: 'svm.lambda' must be > 0");
  if (c.train.svm.epochs < 1) throw ConfigError("config: 'svm.epochs' must be >= 1");
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  ValidateExperiment(config);
  ExperimentResult result;
  result.config = config;

  std::optional<DescriptorSet> database;
  QuerySet queries;
  if (config.synthetic) {
    auto [ds, qs] = GenerateSynthetic(*config.synthetic);
    database = std::move(ds);
    queries = std::move(qs);
  } else {
    if (config.database_path) database = LoadDescriptors(*config.database_path);
    DescriptorSet qs = LoadDescriptors(*config.queries_path);
    queries.descriptors = std::move(qs.descriptors);
    queries.ground_truth = LoadGroundTruth(*config.ground_truth_path);
    if (queries.ground_truth.size() != queries.descriptors.rows()) {
      throw ConfigError("config: 'ground_truth' has " +
                        std::to_string(queries.ground_truth.size()) +
                        " entries for " + std::to_string(queries.descriptors.rows()) +
                        " queries");
    }
  }
  if (config.train.normalize) {
    if (database) *database = L2Normalize(*database);
    queries.descriptors = L2Normalize(queries.descriptors);
  }
  if (database && database->dim() != queries.descriptors.cols()) {
    throw DimensionMismatch("database has dimension " + std::to_string(database->dim()) +
                            ", queries have " +
                            std::to_string(queries.descriptors.cols()));
  }
  const double meters_per_frame =
      database ? database->meters_per_frame : kDefaultMetersPerFrame;

  TrainConfig train = config.train;
  train.normalize = false;
  train.svm.seed = config.seed;
  const auto train_start = Clock::now();
  Model model;
  if (config.model_path) {
    model = LoadModel(*config.model_path);
  } else if (train.scheme == Scheme::kFull) {
    model = TrainFull(*database, train);
  } else {
    const Segmentation seg = SummarizeSequence(database->descriptors.view(),
                                               config.regions, config.segmentation);
    if (config.budget_bytes) {
      result.budget_plan = FitBudget(seg.region_sizes(),
                                     static_cast<std::uint32_t>(database->dim()),
                                     *config.budget_bytes);
      train.d_prime = result.budget_plan->chosen_d_prime;
    }
    model = TrainRegionized(*database, seg, train);
  }
  const double train_seconds =
      std::chrono::duration<double>(Clock::now() - train_start).count();
  if (ModelDim(model) != queries.descriptors.cols()) {
    throw DimensionMismatch("model has dimension " + std::to_string(ModelDim(model)) +
                            ", queries have " +
                            std::to_string(queries.descriptors.cols()));
  }

  const std::size_t m = queries.descriptors.rows();
  const auto query_start = Clock::now();
  result.predictions.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    result.predictions[i] =
        static_cast<std::int64_t>(Predict(model, queries.descriptors.row(i)));
  }
  const double query_us =
      std::chrono::duration<double, std::micro>(Clock::now() - query_start).count() /
      static_cast<double>(m);
  if (config.filter_window > 0) {
    result.filtered_predictions = FilterSequence(config.filter_window, result.predictions,
                                                 config.filter_history);
  }

  std::vector<std::int64_t> nn_predictions;
  double nn_query_us = 0.0;
  if (config.nn_baseline && database) {
    const auto nn_start = Clock::now();
    nn_predictions.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      nn_predictions[i] = static_cast<std::int64_t>(
          BruteForceNN(database->descriptors.view(), queries.descriptors.row(i)));
    }
    nn_query_us = std::chrono::duration<double, std::micro>(Clock::now() - nn_start).count() /
                  static_cast<double>(m);
  }

  // Queries with unknown ground truth are excluded from recall.
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < m; ++i) {
    if (queries.ground_truth[i] >= 0) known.push_back(i);
  }
  if (known.empty()) throw ConfigError("config: no query has known ground truth");
  std::vector<std::int64_t> gt;
  for (std::size_t i : known) gt.push_back(queries.ground_truth[i]);
  auto select = [&](const std::vector<std::int64_t>& all) {
    std::vector<std::int64_t> out;
    for (std::size_t i : known) out.push_back(all[i]);
    return out;
  };

  std::vector<std::int64_t> tolerances = config.tolerances;
  std::sort(tolerances.begin(), tolerances.end());
  tolerances.erase(std::unique(tolerances.begin(), tolerances.end()), tolerances.end());

  result.model_bytes = ModelSizeBytes(model);
  result.storage = ReportStorage(model);
  const bool full = std::holds_alternative<FullTreeModel>(model);
  const std::string method = full ? "BTE-F" : "BTE-C";
  const std::uint64_t budget = config.budget_bytes.value_or(0);
  auto add_rows = [&](const std::string& name, const std::vector<std::int64_t>& preds,
                      std::size_t d_prime, std::uint32_t r, std::uint64_t bytes,
                      int window, double train_s, double query_mean) {
    const RecallCurve curve = ComputeRecallCurve(select(preds), gt, tolerances,
                                                 meters_per_frame);
    for (std::size_t k = 0; k < curve.tolerances.size(); ++k) {
      ResultRow row;
      row.method = name;
      row.n = ModelPlaces(model);
      row.d = ModelDim(model);
      row.d_prime = d_prime;
      row.r = r;
      row.budget_bytes = budget;
      row.model_bytes = bytes;
      row.filter_window = window;
      row.tolerance_frames = curve.tolerances[k];
      row.tolerance_meters = static_cast<double>(curve.tolerances[k]) * meters_per_frame;
      row.recall = curve.recalls[k];
      row.train_seconds = config.record_timings ? train_s : 0.0;
      row.query_microseconds_mean = config.record_timings ? query_mean : 0.0;
      row.seed = config.seed;
      result.rows.push_back(std::move(row));
    }
  };
  const std::size_t d_prime = ModelReducedDim(model);
  const std::uint32_t r = ModelRegions(model);
  add_rows(method, result.predictions, d_prime, r, result.model_bytes, 0,
           train_seconds, query_us);
  if (config.filter_window > 0) {
    add_rows(method + "+SF", result.filtered_predictions, d_prime, r, result.model_bytes,
             config.filter_window, train_seconds, query_us);
  }
  if (!nn_predictions.empty()) {
    add_rows("NN", nn_predictions, database->dim(), 1,
             database->size() * database->dim() * sizeof(float), 0, 0.0, nn_query_us);
  }
  return result;
}

ExperimentConfig ExperimentConfigFromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig c;
  auto get = [&](const Json& obj, const char* key, auto& out, const std::string& path) {
    if (!obj.contains(key)) return;
    try {
      obj.at(key).get_to(out);
    } catch (const Json::exception&) {
      throw ConfigError("config: field '" + path + "' has the wrong type");
    }
  };
  static const char* kKeys[] = {
      "database", "queries", "ground_truth", "model", "synthetic", "scheme",
      "dim_ratio", "d_prime", "sparsity", "regions", "segmentation", "budget_bytes",
      "shared_subset", "normalize", "svm", "filter_window", "filter_history", "tolerances",
      "nn_baseline", "record_timings", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&](const char* k) { return key == k; }) == std::end(kKeys)) {
      throw ConfigError("config: unknown field '" + key + "'");
    }
  }
  auto get_path = [&](const char* key, std::optional<std::string>& out) {
    if (!j.contains(key)) return;
    std::string value;
    get(j, key, value, key);
    out = value;
  };
  get_path("database", c.database_path);
  get_path("queries", c.queries_path);
  get_path("ground_truth", c.ground_truth_path);
  get_path("model", c.model_path);
  get(j, "seed", c.seed, "seed");
  if (j.contains("synthetic")) {
    const Json& s = j.at("synthetic");
    if (!s.is_object()) throw ConfigError("config: field 'synthetic' must be an object");
    SyntheticParams p;
    p.seed = c.seed;
    get(s, "n", p.n, "synthetic.n");
    get(s, "d", p.d, "synthetic.d");
    get(s, "walk_sigma", p.walk_sigma, "synthetic.walk_sigma");
    get(s, "query_sigma", p.query_sigma, "synthetic.query_sigma");
    get(s, "seed", p.seed, "synthetic.seed");
    c.synthetic = p;
  }
  if (j.contains("scheme")) {
    std::string s;
    get(j, "scheme", s, "scheme");
    if (s == "compressed") {
      c.train.scheme = Scheme::kCompressed;
    } else if (s == "full") {
      c.train.scheme = Scheme::kFull;
    } else {
      throw ConfigError("config: field 'scheme' must be 'compressed' or 'full'");
    }
  }
  if (j.contains("segmentation")) {
    std::string s;
    get(j, "segmentation", s, "segmentation");
    if (s == "changepoint") {
      c.segmentation = SegmentationMethod::kChangepoint;
    } else if (s == "uniform") {
      c.segmentation = SegmentationMethod::kUniform;
    } else {
      throw ConfigError("config: field 'segmentation' must be 'changepoint' or 'uniform'");
    }
  }
  get(j, "dim_ratio", c.train.dim_ratio, "dim_ratio");
  if (j.contains("d_prime")) {
    std::size_t d_prime = 0;
    get(j, "d_prime", d_prime, "d_prime");
    c.train.d_prime = d_prime;
  }
  get(j, "sparsity", c.train.sparsity, "sparsity");
  get(j, "regions", c.regions, "regions");
  if (j.contains("budget_bytes")) {
    std::uint64_t budget = 0;
    get(j, "budget_bytes", budget, "budget_bytes");
    c.budget_bytes = budget;
  }
  get(j, "shared_subset", c.train.shared_subset, "shared_subset");
  get(j, "normalize", c.train.normalize, "normalize");
  if (j.contains("svm")) {
    const Json& s = j.at("svm");
    if (!s.is_object()) throw ConfigError("config: field 'svm' must be an object");
    get(s, "lambda", c.train.svm.lambda, "svm.lambda");
    get(s, "epochs", c.train.svm.epochs, "svm.epochs");
  }
  get(j, "filter_window", c.filter_window, "filter_window");
  if (j.contains("filter_history")) {
    std::string h;
    get(j, "filter_history", h, "filter_history");
    if (h == "outputs") {
      c.filter_history = FilterHistory::kOutputs;
    } else if (h == "raw") {
      c.filter_history = FilterHistory::kRaw;
    } else {
      throw ConfigError("config: field 'filter_history' must be 'outputs' or 'raw'");
    }
  }
  get(j, "tolerances", c.tolerances, "tolerances");
  get(j, "nn_baseline", c.nn_baseline, "nn_baseline");
  get(j, "record_timings", c.record_timings, "record_timings");
  c.train.svm.seed = c.seed;
  return c;
}

std::string ExperimentConfigToJson(const ExperimentConfig& c) {
  Json j;
  if (c.database_path) j["database"] = *c.database_path;
  if (c.queries_path) j["queries"] = *c.queries_path;
  if (c.ground_truth_path) j["ground_truth"] = *c.ground_truth_path;
  if (c.model_path) j["model"] = *c.model_path;
  if (c.synthetic) {
    j["synthetic"] = {{"n", c.synthetic->n},
                      {"d", c.synthetic->d},
                      {"walk_sigma", c.synthetic->walk_sigma},
                      {"query_sigma", c.synthetic->query_sigma},
                      {"seed", c.synthetic->seed}};
  }
  j["scheme"] = SchemeName(c.train.scheme);
  j["dim_ratio"] = c.train.dim_ratio;
  if (c.train.d_prime) j["d_prime"] = *c.train.d_prime;
  j["sparsity"] = c.train.sparsity;
  j["regions"] = c.regions;
  j["segmentation"] = SegmentationName(c.segmentation);
  if (c.budget_bytes) j["budget_bytes"] = *c.budget_bytes;
  j["shared_subset"] = c.train.shared_subset;
  j["normalize"] = c.train.normalize;
  j["svm"] = {{"lambda", c.train.svm.lambda}, {"epochs", c.train.svm.epochs}};
  j["filter_window"] = c.filter_window;
  j["filter_history"] = c.filter_history == FilterHistory::kRaw ? "raw" : "outputs";
  j["tolerances"] = c.tolerances;
  j["nn_baseline"] = c.nn_baseline;
  j["record_timings"] = c.record_timings;
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string ResultsToCsv(const ExperimentResult& result) {
  std::string out = std::string(kResultsCsvHeader) + "\n";
  for (const ResultRow& row : result.rows) {
    out += row.method + "," + std::to_string(row.n) + "," + std::to_string(row.d) + "," +
           std::to_string(row.d_prime) + "," + std::to_string(row.r) + "," +
           std::to_string(row.budget_bytes) + "," + std::to_string(row.model_bytes) + "," +
           std::to_string(row.filter_window) + "," + std::to_string(row.tolerance_frames) +
           "," + Fixed(row.tolerance_meters, 3) + "," + Fixed(row.recall) + "," +
           Fixed(row.train_seconds) + "," + Fixed(row.query_microseconds_mean, 3) + "," +
           std::to_string(row.seed) + "\n";
  }
  return out;
}

std::string ResultsToJson(const ExperimentResult& result) {
  Json j;
  j["format_version"] = 1;
  Json metadata;
  metadata["config"] = Json::parse(ExperimentConfigToJson(result.config));
  metadata["model_bytes"] = result.model_bytes;
  Json storage = Json::array();
  for (const auto& e : result.storage.entries) {
    storage.push_back({{"component", e.component}, {"bytes", e.bytes}});
  }
  metadata["storage"] = storage;
  if (result.budget_plan) {
    metadata["budget_plan"] = {{"budget_bytes", result.budget_plan->budget_bytes},
                               {"chosen_d_prime", result.budget_plan->chosen_d_prime},
                               {"predicted_bytes", result.budget_plan->predicted_bytes}};
  }
  j["metadata"] = metadata;
  Json rows = Json::array();
  for (const ResultRow& row : result.rows) {
    rows.push_back({{"method", row.method},
                    {"N", row.n},
                    {"d", row.d},
                    {"d_prime", row.d_prime},
                    {"r", row.r},
                    {"budget_bytes", row.budget_bytes},
                    {"model_bytes", row.model_bytes},
                    {"filter_window", row.filter_window},
                    {"tolerance_frames", row.tolerance_frames},
                    {"tolerance_meters", row.tolerance_meters},
                    {"recall", row.recall},
                    {"train_seconds", row.train_seconds},
                    {"query_microseconds_mean", row.query_microseconds_mean},
                    {"seed", row.seed}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace btel
