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


#include "btel/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "btel/dataset.h"
#include "btel/error.h"
#include "btel/eval.h"
#include "btel/model_io.h"
#include "btel/regions.h"
#include "btel/seqfilter.h"
#include "btel/tree.h"

namespace btel {
namespace {

const std::map<std::string, Scheme> kSchemes = {{"compressed", Scheme::kCompressed},
                                                {"full", Scheme::kFull}};
const std::map<std::string, FilterHistory> kFilterHistories = {
    {"outputs", FilterHistory::kOutputs}, {"raw", FilterHistory::kRaw}};
const std::map<std::string, SegmentationMethod> kSegmentations = {
    {"changepoint", SegmentationMethod::kChangepoint},
    {"uniform", SegmentationMethod::kUniform}};

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// "a:b" is the inclusive range a..b; otherwise a comma-separated list.
std::vector<std::int64_t> ParseTolerances(const std::string& text) {
  std::vector<std::int64_t> out;
  try {
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      const long long lo = std::stoll(text.substr(0, colon));
      const long long hi = std::stoll(text.substr(colon + 1));
      if (lo < 0 || hi < lo) throw std::invalid_argument("range");
      for (long long t = lo; t <= hi; ++t) out.push_back(t);
      return out;
    }
    std::stringstream fields(text);
    std::string field;
    while (std::getline(fields, field, ',')) out.push_back(std::stoll(field));
  } catch (const std::exception&) {
    throw ConfigError("--tolerances: cannot parse '" + text + "'");
  }
  if (out.empty()) throw ConfigError("--tolerances: empty list");
  return out;
}

void PrintStorageSummary(const StorageReport& report, std::ostream& out) {
  std::uint64_t header = 0, segmentation = 0, router = 0, tree_headers = 0;
  std::uint64_t hyperplanes = 0, columns = 0, constants = 0;
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (const auto& e : report.entries) {
    if (e.component == "header") {
      header += e.bytes;
    } else if (e.component == "segmentation") {
      segmentation += e.bytes;
    } else if (e.component == "router") {
      router += e.bytes;
    } else if (ends_with(e.component, ".hyperplane")) {
      hyperplanes += e.bytes;
    } else if (ends_with(e.component, ".columns")) {
      columns += e.bytes;
    } else if (ends_with(e.component, ".constant")) {
      constants += e.bytes;
    } else {
      tree_headers += e.bytes;
    }
  }
  out << "storage:\n"
      << "  header        " << header << "\n"
      << "  segmentation  " << segmentation << "\n"
      << "  router        " << router << "\n"
      << "  tree headers  " << tree_headers << "\n"
      << "  hyperplanes   " << hyperplanes << "\n"
      << "  column ids    " << columns << "\n"
      << "  constants     " << constants << "\n"
      << "  total         " << report.Total() << "\n";
}

struct TrainFlags {
  std::string input;
  std::string output;
  std::string config_path;
  std::string scheme = "compressed";
  double dim_ratio = 0.1;
  std::uint32_t regions = 1;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string segmentation = "changepoint";
  bool shared_subset = false;
  double lambda = 1e-4;
  int epochs = 20;
  double sparsity = kDefaultSparsity;
};

int Train(CLI::App& cmd, const TrainFlags& f, std::ostream& out) {
  ExperimentConfig base;
  if (!f.config_path.empty()) base = ExperimentConfigFromJson(ReadText(f.config_path));
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };

  TrainConfig config = base.train;
  std::uint32_t regions = base.regions;
  SegmentationMethod segmentation = base.segmentation;
  std::optional<std::uint64_t> budget = base.budget_bytes;
  std::uint64_t seed = base.seed;
  if (given("--scheme") || f.config_path.empty()) config.scheme = kSchemes.at(f.scheme);
  if (given("--dim-ratio") || f.config_path.empty()) config.dim_ratio = f.dim_ratio;
  if (given("--regions") || f.config_path.empty()) regions = f.regions;
  if (given("--segmentation") || f.config_path.empty()) {
    segmentation = kSegmentations.at(f.segmentation);
  }
  if (given("--budget")) budget = f.budget;
  if (given("--seed")) seed = f.seed;
  if (given("--normalize")) config.normalize = true;
  if (given("--shared-subset")) config.shared_subset = true;
  if (given("--lambda")) config.svm.lambda = f.lambda;
  if (given("--epochs")) config.svm.epochs = f.epochs;
  if (given("--sparsity")) config.sparsity = f.sparsity;
  config.svm.seed = seed;

  std::string input = f.input;
  if (input.empty() && base.database_path) input = *base.database_path;
  if (input.empty()) throw ConfigError("train: --input is required");
  if (!(config.dim_ratio > 0) || config.dim_ratio > 1) {
    throw ConfigError("train: --dim-ratio must lie in (0, 1]");
  }
  if (config.scheme == Scheme::kFull && (regions != 1 || budget)) {
    throw ConfigError("train: --regions and --budget apply to the compressed scheme only");
  }

  DescriptorSet ds = LoadDescriptors(input);
  if (config.normalize) {
    ds = L2Normalize(ds);
    config.normalize = false;
  }
  if (regions < 1 || regions > ds.size()) {
    throw ConfigError("train: --regions must lie in [1, " + std::to_string(ds.size()) + "]");
  }

  Model model;
  if (config.scheme == Scheme::kFull) {
    model = TrainFull(ds, config);
  } else {
    const Segmentation seg =
        SummarizeSequence(ds.descriptors.view(), regions, segmentation);
    if (budget) {
      const BudgetPlan plan =
          FitBudget(seg.region_sizes(), static_cast<std::uint32_t>(ds.dim()), *budget);
      config.d_prime = plan.chosen_d_prime;
      out << "budget: " << plan.budget_bytes << " bytes -> d' = " << plan.chosen_d_prime
          << " (predicted " << plan.predicted_bytes << " bytes)\n";
    }
    model = TrainRegionized(ds, seg, config);
  }
  SaveModel(model, f.output);
  out << "model: " << f.output << " N=" << ModelPlaces(model) << " d=" << ModelDim(model)
      << " r=" << ModelRegions(model) << " d'=" << ModelReducedDim(model) << "\n";
  PrintStorageSummary(ReportStorage(model), out);
  return kExitOk;
}

struct QueryFlags {
  std::string model;
  std::string queries;
  std::string database;
  std::string baseline;
  std::string output;
  int filter_window = 0;
  std::string filter_history = "outputs";
  bool verbose = false;
  bool normalize = false;
};

int Query(const QueryFlags& f, std::ostream& out) {
  if (f.model.empty() && f.baseline.empty()) {
    throw ConfigError("query: --model or --baseline nn is required");
  }
  if (!f.baseline.empty() && f.database.empty()) {
    throw ConfigError("query: --baseline nn needs --database");
  }
  Matrix queries = LoadDescriptors(f.queries).descriptors;
  if (f.normalize) queries = L2Normalize(queries);

  std::optional<Model> model;
  std::optional<DescriptorSet> database;
  std::uint64_t d = 0;
  if (!f.baseline.empty()) {
    database = LoadDescriptors(f.database);
    if (f.normalize) *database = L2Normalize(*database);
    d = database->dim();
  } else {
    model = LoadModel(f.model);
    d = ModelDim(*model);
  }
  if (queries.cols() != d) {
    throw DimensionMismatch("query: queries have dimension " +
                            std::to_string(queries.cols()) + " but the " +
                            (model ? "model" : "database") + " has dimension " +
                            std::to_string(d));
  }

  SequenceFilter filter(f.filter_window, kFilterHistories.at(f.filter_history));
  std::ostringstream text;
  if (f.verbose) text << "query,raw,filtered,region,local_index\n";
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const auto q = queries.row(i);
    std::int64_t raw = 0;
    std::uint32_t region = 0;
    std::uint64_t local = 0;
    if (database) {
      raw = static_cast<std::int64_t>(BruteForceNN(database->descriptors.view(), q));
      local = raw;
    } else if (const auto* rm = std::get_if<RegionizedModel>(&*model)) {
      const RegionizedPrediction p = PredictRegionized(*rm, q);
      raw = static_cast<std::int64_t>(p.index);
      region = p.region;
      local = p.local_index;
    } else {
      raw = static_cast<std::int64_t>(InferFull(std::get<FullTreeModel>(*model), q));
      local = raw;
    }
    const std::int64_t filtered = filter.Filter(raw);
    if (f.verbose) {
      text << i << ',' << raw << ',' << filtered << ',' << region << ',' << local << '\n';
    } else {
      text << filtered << '\n';
    }
  }
  if (f.output.empty()) {
    out << text.str();
  } else {
    WriteFileAtomic(f.output, text.str());
  }
  return kExitOk;
}

struct EvalFlags {
  std::string config_path;
  std::string model;
  std::string database;
  std::string queries;
  std::string ground_truth;
  std::string tolerances;
  std::string output;
  std::string json;
  int filter_window = 0;
  std::string filter_history = "outputs";
  std::uint64_t seed = 0;
  bool record_timings = false;
  bool normalize = false;
  bool no_baseline = false;
};

int Eval(CLI::App& cmd, const EvalFlags& f, std::ostream& out) {
  ExperimentConfig config;
  if (!f.config_path.empty()) config = ExperimentConfigFromJson(ReadText(f.config_path));
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--model")) config.model_path = f.model;
  if (given("--database")) config.database_path = f.database;
  if (given("--queries")) config.queries_path = f.queries;
  if (given("--ground-truth")) config.ground_truth_path = f.ground_truth;
  if (given("--tolerances")) config.tolerances = ParseTolerances(f.tolerances);
  if (given("--filter-window")) config.filter_window = f.filter_window;
  if (given("--filter-history")) config.filter_history = kFilterHistories.at(f.filter_history);
  if (given("--seed")) {
    config.seed = f.seed;
    config.train.svm.seed = f.seed;
  }
  if (given("--record-timings")) config.record_timings = true;
  if (given("--normalize")) config.train.normalize = true;
  if (given("--no-baseline")) config.nn_baseline = false;
  if (config.queries_path && !config.ground_truth_path) {
    throw ConfigError("eval: --ground-truth is required");
  }

  const ExperimentResult result = RunExperiment(config);
  const std::string csv = ResultsToCsv(result);
  if (f.output.empty()) {
    out << csv;
  } else {
    WriteFileAtomic(f.output, csv);
  }
  if (!f.json.empty()) WriteFileAtomic(f.json, ResultsToJson(result));
  return kExitOk;
}

struct SynthFlags {
  SyntheticParams params;
  std::string database;
  std::string queries;
  std::string ground_truth;
  float meters_per_frame = kDefaultMetersPerFrame;
};

int Synth(const SynthFlags& f, std::ostream& out) {
  auto [ds, qs] = GenerateSynthetic(f.params);
  ds.meters_per_frame = f.meters_per_frame;
  SaveDescriptors(ds, f.database);
  if (!f.queries.empty()) {
    DescriptorSet query_set;
    query_set.descriptors = std::move(qs.descriptors);
    query_set.meters_per_frame = f.meters_per_frame;
    SaveDescriptors(query_set, f.queries);
  }
  if (!f.ground_truth.empty()) SaveGroundTruth(qs.ground_truth, f.ground_truth);
  out << "synth: N=" << ds.size() << " d=" << ds.dim() << " -> " << f.database << "\n";
  return kExitOk;
}

int Inspect(const std::string& path, std::ostream& out) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  const Model model = DeserializeModel(bytes);
  const StorageReport report = ReportStorage(model);
  const bool full = std::holds_alternative<FullTreeModel>(model);
  out << "format: BTEL-MDL v" << kModelVersion << "\n"
      << "scheme: " << (full ? "full" : "compressed") << "\n"
      << "N: " << ModelPlaces(model) << "\n"
      << "d: " << ModelDim(model) << "\n"
      << "r: " << ModelRegions(model) << "\n"
      << "d_prime: " << ModelReducedDim(model) << "\n";
  for (const auto& e : report.entries) out << "  " << e.component << " " << e.bytes << "\n";
  out << "storage total: " << report.Total() << "\n"
      << "file size: " << bytes.size() << "\n";

  bool ok = report.Total() == bytes.size() && ModelSizeBytes(model) == bytes.size();
  out << "check storage == file size: " << (ok ? "ok" : "FAILED") << "\n";
  if (const auto* rm = std::get_if<RegionizedModel>(&model)) {
    std::uint64_t covered = 0;
    bool levels_ok = true;
    for (std::uint32_t k = 0; k < rm->num_regions(); ++k) {
      covered += rm->segmentation.region_size(k);
      levels_ok &= static_cast<int>(rm->trees[k].levels.size()) ==
                   BitsRequired(rm->trees[k].n);
    }
    const bool partition_ok = covered == rm->n;
    out << "check partition coverage: " << (partition_ok ? "ok" : "FAILED") << "\n"
        << "check level counts: " << (levels_ok ? "ok" : "FAILED") << "\n";
    ok &= partition_ok && levels_ok;
  } else {
    const auto& fm = std::get<FullTreeModel>(model);
    const bool count_ok = fm.nodes.size() < (std::uint64_t{1} << fm.b);
    out << "check node count: " << (count_ok ? "ok" : "FAILED") << "\n";
    ok &= count_ok;
  }
  return ok ? kExitOk : kExitIo;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Storage-budgeted place recognition with binary tree encoding", "btel"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic database and query set");
  synth_cmd->add_option("--n", synth.params.n, "Number of places")->default_val(1000);
  synth_cmd->add_option("--d", synth.params.d, "Descriptor dimension")->default_val(128);
  synth_cmd->add_option("--walk-sigma", synth.params.walk_sigma)->default_val(0.05);
  synth_cmd->add_option("--query-sigma", synth.params.query_sigma)->default_val(0.01);
  synth_cmd->add_option("--seed", synth.params.seed)->default_val(0);
  synth_cmd->add_option("--meters-per-frame", synth.meters_per_frame)->default_val(20.0);
  synth_cmd->add_option("--out", synth.database, "Database file (BTEL-DSC)")->required();
  synth_cmd->add_option("--queries-out", synth.queries, "Query file (BTEL-DSC)");
  synth_cmd->add_option("--ground-truth-out", synth.ground_truth, "Ground truth file");

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a descriptor file");
  train_cmd->add_option("--input", train.input, "Database descriptors (.btel or .csv)");
  train_cmd->add_option("--out", train.output, "Model file")->required();
  train_cmd->add_option("--config", train.config_path, "JSON config; flags win");
  train_cmd->add_option("--scheme", train.scheme)
      ->check(CLI::IsMember({"compressed", "full"}));
  train_cmd->add_option("--dim-ratio", train.dim_ratio, "d'/d");
  train_cmd->add_option("--regions", train.regions);
  train_cmd->add_option("--budget", train.budget, "Storage budget in bytes");
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_flag("--normalize", train.normalize, "L2-normalize descriptors");
  train_cmd->add_option("--segmentation", train.segmentation)
      ->check(CLI::IsMember({"changepoint", "uniform"}));
  train_cmd->add_flag("--shared-subset", train.shared_subset);
  train_cmd->add_option("--lambda", train.lambda);
  train_cmd->add_option("--epochs", train.epochs);
  train_cmd->add_option("--sparsity", train.sparsity);

  QueryFlags query;
  auto* query_cmd = app.add_subcommand("query", "Localize query descriptors");
  query_cmd->add_option("--model", query.model);
  query_cmd->add_option("--queries", query.queries)->required();
  query_cmd->add_option("--database", query.database, "Database for --baseline nn");
  query_cmd->add_option("--baseline", query.baseline)->check(CLI::IsMember({"nn"}));
  query_cmd->add_option("--filter-window", query.filter_window, "0 disables")
      ->check(CLI::NonNegativeNumber);
  query_cmd->add_option("--filter-history", query.filter_history,
                        "Window contents: corrected outputs or raw predictions")
      ->check(CLI::IsMember({"outputs", "raw"}));
  query_cmd->add_flag("--verbose", query.verbose);
  query_cmd->add_flag("--normalize", query.normalize);
  query_cmd->add_option("--out", query.output);

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate recall curves and write results");
  eval_cmd->add_option("--config", eval.config_path, "Experiment JSON; flags win");
  eval_cmd->add_option("--model", eval.model);
  eval_cmd->add_option("--database", eval.database);
  eval_cmd->add_option("--queries", eval.queries);
  eval_cmd->add_option("--ground-truth", eval.ground_truth);
  eval_cmd->add_option("--tolerances", eval.tolerances, "e.g. 0:80 or 0,5,10");
  eval_cmd->add_option("--filter-window", eval.filter_window)->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--filter-history", eval.filter_history)
      ->check(CLI::IsMember({"outputs", "raw"}));
  eval_cmd->add_option("--seed", eval.seed);
  eval_cmd->add_flag("--record-timings", eval.record_timings);
  eval_cmd->add_flag("--normalize", eval.normalize);
  eval_cmd->add_flag("--no-baseline", eval.no_baseline);
  eval_cmd->add_option("--out", eval.output, "Results CSV");
  eval_cmd->add_option("--json", eval.json, "Results JSON");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a model's header and storage");
  inspect_cmd->add_option("model", inspect_path)->required();

  std::vector<std::string> reversed;
  if (!args.empty()) reversed.assign(args.begin() + 1, args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (synth_cmd->parsed()) return Synth(synth, out);
    if (train_cmd->parsed()) return Train(*train_cmd, train, out);
    if (query_cmd->parsed()) return Query(query, out);
    if (eval_cmd->parsed()) return Eval(*eval_cmd, eval, out);
    if (inspect_cmd->parsed()) return Inspect(inspect_path, out);
  } catch (const InfeasibleBudget& e) {
    err << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace btel
