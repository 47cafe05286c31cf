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


#ifndef BTEL_TREE_H_
#define BTEL_TREE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "btel/bitcodec.h"
#include "btel/dataset.h"
#include "btel/featsel.h"
#include "btel/svm.h"

namespace btel {

enum class Scheme : std::uint8_t { kCompressed = 0, kFull = 1 };

inline constexpr std::uint64_t kMaxFullTrainingSize = 1ull << 20;

struct TrainConfig {
  Scheme scheme = Scheme::kCompressed;
  double dim_ratio = 0.1;
  // Overrides dim_ratio when set (budget fitting sets it).
  std::optional<std::size_t> d_prime;
  double sparsity = kDefaultSparsity;
  SvmConfig svm;
  // One column subset for every level, selected from level-1 labels.
  bool shared_subset = false;
  bool normalize = false;

  std::size_t ReducedDim(std::size_t d) const;
};

// One classifier per bit level; level j predicts bit j of the index code.
struct CompressedTreeModel {
  std::uint64_t n = 0;
  int b = 0;
  std::uint32_t d = 0;
  std::vector<BinaryClassifier> levels;
};

// One classifier per internal node that has members on both sides.
struct FullTreeModel {
  std::uint64_t n = 0;
  int b = 0;
  std::uint32_t d = 0;
  std::map<std::uint64_t, Hyperplane> nodes;
};

// Level-|level| training labels of the compressed scheme: bit |level| of
// every index in [0, n).
std::vector<std::uint8_t> LevelLabels(std::uint64_t n, int level, int width);

// Indices in [0, n) reaching |node| and their labels (bit level(node) + 1).
struct NodeTrainingSet {
  IndexRange members;
  std::vector<std::uint8_t> labels;
  bool two_sided = false;
};
NodeTrainingSet NodeTrainingData(TreeAddress node, std::uint64_t n, int width);

CompressedTreeModel TrainCompressed(const DescriptorSet& ds,
                                    const TrainConfig& config);
CompressedTreeModel TrainCompressed(MatrixView data, const TrainConfig& config);

FullTreeModel TrainFull(const DescriptorSet& ds, const TrainConfig& config);
FullTreeModel TrainFull(MatrixView data, const TrainConfig& config);

// Decodes the level bits and clamps to [0, n - 1].
std::uint64_t InferCompressed(const CompressedTreeModel& model,
                              std::span<const float> q);

struct FullDescent {
  std::uint64_t index = 0;
  std::vector<std::uint64_t> path;  // internal nodes visited, root first
  int evaluations = 0;              // classifiers actually evaluated
};

FullDescent DescendFull(const FullTreeModel& model, std::span<const float> q);
std::uint64_t InferFull(const FullTreeModel& model, std::span<const float> q);

struct BudgetPlan {
  std::uint64_t budget_bytes = 0;
  std::size_t chosen_d_prime = 0;
  std::uint64_t predicted_bytes = 0;
};

// Largest d' <= d whose regionized compressed model fits in |budget_bytes|,
// for the given per-region database sizes. Throws InfeasibleBudget.
BudgetPlan FitBudget(std::span<const std::uint64_t> region_sizes,
                     std::uint32_t d, std::uint64_t budget_bytes);
// Same, with the regions taken as a uniform split of |n| into |r| parts.
BudgetPlan FitBudget(std::uint64_t n, std::uint32_t d, std::uint32_t r,
                     std::uint64_t budget_bytes);

}  // namespace btel

#endif  // BTEL_TREE_H_
