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


#include "btel/svm.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "btel/error.h"
#include "internal/parallel.h"

namespace btel {
namespace {

void CheckDim(const Hyperplane& h, std::span<const float> x) {
  if (h.columns.size() != h.weights.size()) {
    throw ConfigError("hyperplane has " + std::to_string(h.columns.size()) +
                      " columns but " + std::to_string(h.weights.size()) +
                      " weights");
  }
  if (!h.columns.empty() && h.columns.back() >= x.size()) {
    throw DimensionMismatch("hyperplane column " +
                            std::to_string(h.columns.back()) +
                            " out of range for a " + std::to_string(x.size()) +
                            "-dimensional descriptor");
  }
}

// Row-major training matrix restricted to the chosen columns. Owns a gathered
// copy only when a proper subset is requested.
class TrainingRows {
 public:
  TrainingRows(MatrixView data, std::span<const std::uint32_t> columns) {
    if (columns.empty() || columns.size() == data.cols()) {
      bool identity = true;
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] != j) identity = false;
      }
      if (identity) {
        view_ = data;
        return;
      }
    }
    gathered_.resize(data.rows() * columns.size());
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const auto row = data.row(i);
      float* out = gathered_.data() + i * columns.size();
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= data.cols()) {
          throw DimensionMismatch("column " + std::to_string(columns[j]) +
                                  " out of range for dimension " +
                                  std::to_string(data.cols()));
        }
        out[j] = row[columns[j]];
      }
    }
    view_ = MatrixView(gathered_.data(), data.rows(), columns.size());
  }

  const MatrixView& view() const { return view_; }

 private:
  std::vector<float> gathered_;
  MatrixView view_;
};

}  // namespace

BinaryClassifier TrainBinary(MatrixView data,
                             std::span<const std::uint8_t> labels,
                             const SvmConfig& config,
                             std::span<const std::uint32_t> columns) {
  const std::size_t n = data.rows();
  if (n == 0) throw ConfigError("TrainBinary: no training rows");
  if (labels.size() != n) {
    throw ConfigError("TrainBinary: " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(n) + " rows");
  }
  if (!(config.lambda > 0)) throw ConfigError("TrainBinary: lambda must be > 0");
  if (config.epochs < 1) throw ConfigError("TrainBinary: epochs must be >= 1");

  const TrainingRows rows(data, columns);
  const MatrixView x = rows.view();
  const std::size_t dim = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (float v : x.row(i)) {
      if (!std::isfinite(v)) {
        throw ConfigError("TrainBinary: non-finite value in row " + std::to_string(i));
      }
    }
  }

  const bool first = labels[0] != 0;
  if (std::all_of(labels.begin(), labels.end(),
                  [&](std::uint8_t l) { return (l != 0) == first; })) {
    return ConstantClassifier{static_cast<std::uint8_t>(first)};
  }

  // Pegasos without projection: w_t = v_t / (lambda t), where v_t sums y x
  // over the margin violators seen so far. The returned model averages w_t
  // over the second half of the steps. With A the running sum of
  // 1 / (lambda t) inside the window, that average is (A v - U) / steps, where
  // U accumulates A * y * x at every update.
  const double lambda = config.lambda;
  const std::uint64_t total_steps = static_cast<std::uint64_t>(config.epochs) * n;
  const std::uint64_t average_from = total_steps / 2 + 1;
  std::vector<double> v(dim + 1, 0.0);
  std::vector<double> u(dim + 1, 0.0);
  double accumulated = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const auto row = x.row(i);
      const double y = labels[i] ? 1.0 : -1.0;
      double margin = 0.0;
      if (t > 1) {
        double dot = v[dim];
        for (std::size_t j = 0; j < dim; ++j) dot += v[j] * row[j];
        margin = y * dot / (lambda * static_cast<double>(t - 1));
      }
      if (margin < 1.0) {
        const double ua = accumulated * y;
        for (std::size_t j = 0; j < dim; ++j) {
          v[j] += y * row[j];
          u[j] += ua * row[j];
        }
        v[dim] += y;
        u[dim] += ua;
      }
      if (t >= average_from) accumulated += 1.0 / (lambda * static_cast<double>(t));
    }
  }

  const double steps = static_cast<double>(total_steps - average_from + 1);
  Hyperplane h;
  h.weights.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    h.weights[j] = static_cast<float>((accumulated * v[j] - u[j]) / steps);
  }
  h.bias = static_cast<float>((accumulated * v[dim] - u[dim]) / steps);
  if (columns.empty()) {
    h.columns.resize(dim);
    std::iota(h.columns.begin(), h.columns.end(), 0u);
  } else {
    h.columns.assign(columns.begin(), columns.end());
  }
  return h;
}

double DecisionValue(const Hyperplane& h, std::span<const float> x) {
  CheckDim(h, x);
  double value = h.bias;
  for (std::size_t j = 0; j < h.weights.size(); ++j) {
    value += static_cast<double>(h.weights[j]) * x[h.columns[j]];
  }
  return value;
}

int PredictBit(const BinaryClassifier& c, std::span<const float> x) {
  if (const auto* constant = std::get_if<ConstantClassifier>(&c)) {
    return constant->bit;
  }
  return DecisionValue(std::get<Hyperplane>(c), x) >= 0.0 ? 1 : 0;
}

double SvmObjective(const Hyperplane& h, MatrixView data,
                    std::span<const std::uint8_t> labels, double lambda) {
  double norm2 = static_cast<double>(h.bias) * h.bias;
  for (float w : h.weights) norm2 += static_cast<double>(w) * w;
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double y = labels[i] ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * DecisionValue(h, data.row(i)));
  }
  return 0.5 * lambda * norm2 + hinge / static_cast<double>(data.rows());
}

MulticlassModel TrainMulticlass(MatrixView data,
                                std::span<const std::uint32_t> labels,
                                std::uint32_t num_classes,
                                const SvmConfig& config) {
  if (num_classes == 0) throw ConfigError("TrainMulticlass: need at least one class");
  if (labels.size() != data.rows()) {
    throw ConfigError("TrainMulticlass: " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(data.rows()) + " rows");
  }
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::uint32_t l : labels) {
    if (l >= num_classes) {
      throw ConfigError("TrainMulticlass: class id " + std::to_string(l) +
                        " >= " + std::to_string(num_classes));
    }
    ++counts[l];
  }
  for (std::uint32_t k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) {
      throw ConfigError("TrainMulticlass: class " + std::to_string(k) +
                        " has no samples");
    }
  }

  MulticlassModel model;
  model.per_class.resize(num_classes);
  internal::ParallelFor(num_classes, [&](std::size_t k) {
    std::vector<std::uint8_t> binary(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) binary[i] = labels[i] == k;
    SvmConfig class_config = config;
    class_config.seed = internal::DeriveSeed(config.seed, k);
    BinaryClassifier c = TrainBinary(data, binary, class_config);
    if (auto* h = std::get_if<Hyperplane>(&c)) {
      model.per_class[k] = std::move(*h);
    } else {
      // Only a single-class model gets here: every sample is positive.
      Hyperplane always;
      always.columns.resize(data.cols());
      std::iota(always.columns.begin(), always.columns.end(), 0u);
      always.weights.assign(data.cols(), 0.0f);
      always.bias = std::get<ConstantClassifier>(c).bit ? 1.0f : -1.0f;
      model.per_class[k] = std::move(always);
    }
  });
  return model;
}

std::uint32_t PredictClass(const MulticlassModel& m, std::span<const float> x) {
  if (m.per_class.empty()) throw ConfigError("PredictClass: empty model");
  std::uint32_t best = 0;
  double best_value = DecisionValue(m.per_class[0], x);
  for (std::uint32_t k = 1; k < m.per_class.size(); ++k) {
    const double value = DecisionValue(m.per_class[k], x);
    if (value > best_value) {
      best = k;
      best_value = value;
    }
  }
  return best;
}

}  // namespace btel
