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


#ifndef BTEL_SVM_H_
#define BTEL_SVM_H_

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "btel/matrix.h"

namespace btel {

// Linear classifier over a subset of descriptor columns. The stored form is
// d' column ids, d' weights and a bias.
struct Hyperplane {
  std::vector<std::uint32_t> columns;  // strictly increasing
  std::vector<float> weights;
  float bias = 0.0f;

  std::size_t dim() const { return weights.size(); }
  bool operator==(const Hyperplane&) const = default;
};

// Stands in for a hyperplane when every training label was the same bit.
struct ConstantClassifier {
  std::uint8_t bit = 0;
  bool operator==(const ConstantClassifier&) const = default;
};

using BinaryClassifier = std::variant<Hyperplane, ConstantClassifier>;

struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 0;
};

struct MulticlassModel {
  std::vector<Hyperplane> per_class;  // one-vs-rest, all over every column

  std::size_t num_classes() const { return per_class.size(); }
};

// Regularized hinge loss minimized by averaged stochastic subgradient descent
// (step 1 / (lambda t)); the bias is learned as the weight of a constant unit
// feature. |columns| restricts training to those columns of |data| (empty
// means all) and becomes the hyperplane's column subset. Uniform labels yield
// a ConstantClassifier.
BinaryClassifier TrainBinary(MatrixView data,
                             std::span<const std::uint8_t> labels,
                             const SvmConfig& config,
                             std::span<const std::uint32_t> columns = {});

double DecisionValue(const Hyperplane& h, std::span<const float> x);

// 1 iff the decision value is >= 0.
int PredictBit(const BinaryClassifier& c, std::span<const float> x);

// Mean hinge loss plus (lambda / 2) * ||(w, b)||^2 over the training rows.
double SvmObjective(const Hyperplane& h, MatrixView data,
                    std::span<const std::uint8_t> labels, double lambda);

// |labels| are class ids in [0, num_classes); every class needs a sample.
MulticlassModel TrainMulticlass(MatrixView data,
                                std::span<const std::uint32_t> labels,
                                std::uint32_t num_classes,
                                const SvmConfig& config);

// Argmax of per-class decision values, ties to the lowest class id.
std::uint32_t PredictClass(const MulticlassModel& m, std::span<const float> x);

}  // namespace btel

#endif  // BTEL_SVM_H_
