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


#include "btel/tree.h"

#include <algorithm>
#include <string>

#include "btel/error.h"
#include "btel/model_io.h"
#include "internal/parallel.h"

namespace btel {
namespace {

void CheckQuery(std::uint32_t d, std::span<const float> q) {
  if (q.size() != d) {
    throw DimensionMismatch("query has dimension " + std::to_string(q.size()) +
                            ", model expects " + std::to_string(d));
  }
}

bool Uniform(std::span<const std::uint8_t> labels) {
  return std::all_of(labels.begin(), labels.end(),
                     [&](std::uint8_t l) { return l == labels.front(); });
}

// Tree nodes with members on both sides, in breadth-first order.
std::vector<std::uint64_t> TrainableNodes(std::uint64_t n, int b) {
  std::vector<std::uint64_t> nodes;
  std::vector<TreeAddress> frontier = {TreeAddress{0}};
  for (int level = 0; level < b; ++level) {
    std::vector<TreeAddress> next;
    for (TreeAddress node : frontier) {
      const IndexRange left = NodeMembers(node.zero_child(), n, b);
      const IndexRange right = NodeMembers(node.one_child(), n, b);
      if (!left.empty() && !right.empty()) nodes.push_back(node.node_index);
      if (left.size() >= 2) next.push_back(node.zero_child());
      if (right.size() >= 2) next.push_back(node.one_child());
    }
    frontier = std::move(next);
  }
  return nodes;
}

}  // namespace

std::size_t TrainConfig::ReducedDim(std::size_t d) const {
  if (d_prime) {
    if (*d_prime < 1) throw ConfigError("d_prime must be >= 1");
    return std::min(*d_prime, d);
  }
  return ReducedDimension(dim_ratio, d);
}

std::vector<std::uint8_t> LevelLabels(std::uint64_t n, int level, int width) {
  std::vector<std::uint8_t> labels(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::uint8_t>(IndexBit(i, level, width));
  }
  return labels;
}

NodeTrainingSet NodeTrainingData(TreeAddress node, std::uint64_t n, int width) {
  NodeTrainingSet set;
  set.members = NodeMembers(node, n, width);
  const int level = node.level();
  if (level >= width) return set;
  for (std::uint64_t i = set.members.begin; i < set.members.end; ++i) {
    set.labels.push_back(static_cast<std::uint8_t>(IndexBit(i, level + 1, width)));
  }
  set.two_sided = !NodeMembers(node.zero_child(), n, width).empty() &&
                  !NodeMembers(node.one_child(), n, width).empty();
  return set;
}

CompressedTreeModel TrainCompressed(MatrixView data, const TrainConfig& config) {
  if (data.rows() == 0 || data.cols() == 0) {
    throw ConfigError("TrainCompressed: empty descriptor set");
  }
  CompressedTreeModel model;
  model.n = data.rows();
  model.b = BitsRequired(model.n);
  model.d = static_cast<std::uint32_t>(data.cols());
  const std::size_t d_prime = config.ReducedDim(data.cols());

  std::vector<std::uint32_t> shared;
  if (config.shared_subset) {
    const auto labels = LevelLabels(model.n, 1, model.b);
    if (!Uniform(labels)) shared = SelectFeatures(data, labels, d_prime, config.sparsity);
  }

  model.levels.resize(model.b);
  internal::ParallelFor(model.b, [&](std::size_t j) {
    const int level = static_cast<int>(j) + 1;
    const auto labels = LevelLabels(model.n, level, model.b);
    if (Uniform(labels)) {
      model.levels[j] = ConstantClassifier{labels.front()};
      return;
    }
    const std::vector<std::uint32_t> columns =
        config.shared_subset ? shared
                             : SelectFeatures(data, labels, d_prime, config.sparsity);
    SvmConfig svm = config.svm;
    svm.seed = internal::DeriveSeed(config.svm.seed, j);
    model.levels[j] = TrainBinary(data, labels, svm, columns);
  });
  return model;
}

CompressedTreeModel TrainCompressed(const DescriptorSet& ds,
                                    const TrainConfig& config) {
  if (config.normalize) {
    const Matrix normalized = L2Normalize(ds.descriptors);
    return TrainCompressed(normalized.view(), config);
  }
  return TrainCompressed(ds.descriptors.view(), config);
}

FullTreeModel TrainFull(MatrixView data, const TrainConfig& config) {
  if (data.rows() == 0 || data.cols() == 0) {
    throw ConfigError("TrainFull: empty descriptor set");
  }
  if (data.rows() > kMaxFullTrainingSize) {
    throw ConfigError("TrainFull: N = " + std::to_string(data.rows()) +
                      " exceeds the full-training limit of 2^20");
  }
  FullTreeModel model;
  model.n = data.rows();
  model.b = BitsRequired(model.n);
  model.d = static_cast<std::uint32_t>(data.cols());
  const std::size_t d_prime = config.ReducedDim(data.cols());

  const std::vector<std::uint64_t> nodes = TrainableNodes(model.n, model.b);
  std::vector<Hyperplane> trained(nodes.size());
  internal::ParallelFor(nodes.size(), [&](std::size_t k) {
    const NodeTrainingSet set = NodeTrainingData({nodes[k]}, model.n, model.b);
    const MatrixView members = data.slice(set.members.begin, set.members.end);
    const auto columns =
        SelectFeatures(members, set.labels, d_prime, config.sparsity);
    SvmConfig svm = config.svm;
    svm.seed = internal::DeriveSeed(config.svm.seed, nodes[k]);
    trained[k] = std::get<Hyperplane>(TrainBinary(members, set.labels, svm, columns));
  });
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    model.nodes.emplace(nodes[k], std::move(trained[k]));
  }
  return model;
}

FullTreeModel TrainFull(const DescriptorSet& ds, const TrainConfig& config) {
  if (config.normalize) {
    const Matrix normalized = L2Normalize(ds.descriptors);
    return TrainFull(normalized.view(), config);
  }
  return TrainFull(ds.descriptors.view(), config);
}

std::uint64_t InferCompressed(const CompressedTreeModel& model,
                              std::span<const float> q) {
  CheckQuery(model.d, q);
  std::uint64_t value = 0;
  for (const BinaryClassifier& level : model.levels) {
    value = (value << 1) | static_cast<std::uint64_t>(PredictBit(level, q));
  }
  return std::min(value, model.n - 1);
}

FullDescent DescendFull(const FullTreeModel& model, std::span<const float> q) {
  CheckQuery(model.d, q);
  FullDescent descent;
  TreeAddress node{0};
  for (int level = 0; level < model.b; ++level) {
    descent.path.push_back(node.node_index);
    const bool has_left = !NodeMembers(node.zero_child(), model.n, model.b).empty();
    const bool has_right = !NodeMembers(node.one_child(), model.n, model.b).empty();
    int bit = has_right && !has_left ? 1 : 0;
    if (has_left && has_right) {
      const auto it = model.nodes.find(node.node_index);
      if (it == model.nodes.end()) {
        throw ParseError("full tree is missing the classifier of node " +
                         std::to_string(node.node_index));
      }
      bit = DecisionValue(it->second, q) >= 0.0 ? 1 : 0;
      ++descent.evaluations;
    }
    node = bit ? node.one_child() : node.zero_child();
  }
  descent.index = node.node_index - ((std::uint64_t{1} << model.b) - 1);
  return descent;
}

std::uint64_t InferFull(const FullTreeModel& model, std::span<const float> q) {
  return DescendFull(model, q).index;
}

BudgetPlan FitBudget(std::span<const std::uint64_t> region_sizes,
                     std::uint32_t d, std::uint64_t budget_bytes) {
  if (region_sizes.empty()) throw ConfigError("FitBudget: no regions");
  if (d == 0) throw ConfigError("FitBudget: d must be >= 1");
  const auto size_at = [&](std::uint64_t d_prime) {
    return model_format::PredictedModelBytes(region_sizes, d, d_prime);
  };
  const std::uint64_t minimum = size_at(1);
  if (minimum > budget_bytes) {
    throw InfeasibleBudget("budget of " + std::to_string(budget_bytes) +
                               " bytes is below the minimum achievable size of " +
                               std::to_string(minimum) + " bytes",
                           minimum);
  }
  // Size is non-decreasing in d'.
  std::uint64_t lo = 1;
  std::uint64_t hi = d;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (size_at(mid) <= budget_bytes) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return BudgetPlan{budget_bytes, static_cast<std::size_t>(lo), size_at(lo)};
}

BudgetPlan FitBudget(std::uint64_t n, std::uint32_t d, std::uint32_t r,
                     std::uint64_t budget_bytes) {
  if (r < 1 || r > n) {
    throw ConfigError("FitBudget: region count " + std::to_string(r) +
                      " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::uint64_t> sizes(r, n / r);
  for (std::uint64_t k = 0; k < n % r; ++k) ++sizes[k];
  return FitBudget(sizes, d, budget_bytes);
}

}  // namespace btel
