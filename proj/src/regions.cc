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


#include "btel/regions.h"

#include <cmath>
#include <limits>
#include <string>

#include "btel/error.h"
#include "internal/parallel.h"

namespace btel {
namespace {

double Dot(std::span<const float> a, std::span<const float> b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= a.size(); j += 4) {
    s0 += static_cast<double>(a[j]) * b[j];
    s1 += static_cast<double>(a[j + 1]) * b[j + 1];
    s2 += static_cast<double>(a[j + 2]) * b[j + 2];
    s3 += static_cast<double>(a[j + 3]) * b[j + 3];
  }
  for (; j < a.size(); ++j) s0 += static_cast<double>(a[j]) * b[j];
  return (s0 + s1) + (s2 + s3);
}

void CheckRegionCount(std::uint64_t n, std::uint32_t r) {
  if (r < 1 || r > n) {
    throw ConfigError("region count " + std::to_string(r) + " outside [1, " +
                      std::to_string(n) + "]");
  }
}

// Exact O(N^2 d + N^2 r) dynamic program. For segment [i, j) the SSE is
// sum_p |x_p|^2 - |sum_p x_p|^2 / (j - i). The block norm G(i, j) =
// |sum_{p in [i, j)} x_p|^2 is updated column by column:
// G(i, j + 1) = G(i, j) + 2 sum_{p in [i, j)} x_p . x_j + |x_j|^2.
Segmentation ChangepointSegmentation(MatrixView data, std::uint32_t r) {
  const std::size_t n = data.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> sq_prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sq_prefix[i + 1] = sq_prefix[i] + Dot(data.row(i), data.row(i));
  }

  // best[k][j]: minimal cost of splitting [0, j) into k segments.
  std::vector<std::vector<double>> best(r + 1, std::vector<double>(n + 1, kInf));
  std::vector<std::vector<std::uint32_t>> argbest(
      r + 1, std::vector<std::uint32_t>(n + 1, 0));
  best[0][0] = 0.0;

  std::vector<double> block(n + 1, 0.0);  // block[i] = G(i, j) for current j
  std::vector<double> dots(n, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    // Extend every block [i, j - 1) by row j - 1.
    const auto xj = data.row(j - 1);
    for (std::size_t p = 0; p + 1 < j; ++p) dots[p] = Dot(data.row(p), xj);
    const double self = sq_prefix[j] - sq_prefix[j - 1];
    double suffix = 0.0;  // sum_{p in [i, j - 1)} x_p . x_{j-1}
    block[j - 1] = 0.0;
    for (std::size_t i = j; i-- > 0;) {
      if (i + 1 < j) suffix += dots[i];
      block[i] += 2.0 * suffix + self;
    }
    const std::uint32_t max_k = static_cast<std::uint32_t>(std::min<std::size_t>(r, j));
    for (std::size_t i = 0; i < j; ++i) {
      const double len = static_cast<double>(j - i);
      const double cost =
          std::max(0.0, (sq_prefix[j] - sq_prefix[i]) - block[i] / len);
      for (std::uint32_t k = 1; k <= max_k; ++k) {
        if (best[k - 1][i] == kInf) continue;
        const double candidate = best[k - 1][i] + cost;
        if (candidate < best[k][j]) {
          best[k][j] = candidate;
          argbest[k][j] = static_cast<std::uint32_t>(i);
        }
      }
    }
  }

  Segmentation seg;
  seg.boundaries.assign(r + 1, 0);
  seg.boundaries[r] = n;
  std::size_t j = n;
  for (std::uint32_t k = r; k >= 1; --k) {
    j = argbest[k][j];
    seg.boundaries[k - 1] = j;
  }
  return seg;
}

MatrixView Prepared(const DescriptorSet& ds, const TrainConfig& config,
                    Matrix& storage) {
  if (!config.normalize) return ds.descriptors.view();
  storage = L2Normalize(ds.descriptors);
  return storage.view();
}

RegionizedModel TrainOnView(MatrixView data, const Segmentation& segmentation,
                            const TrainConfig& config) {
  const std::uint32_t r = segmentation.num_regions();
  CheckRegionCount(data.rows(), r);
  if (segmentation.boundaries.front() != 0 ||
      segmentation.boundaries.back() != data.rows()) {
    throw ConfigError("segmentation does not cover the database");
  }
  for (std::uint32_t k = 0; k < r; ++k) {
    if (segmentation.boundaries[k + 1] <= segmentation.boundaries[k]) {
      throw ConfigError("region " + std::to_string(k) + " is empty");
    }
  }

  RegionizedModel model;
  model.n = data.rows();
  model.d = static_cast<std::uint32_t>(data.cols());
  model.segmentation = segmentation;
  model.trees.resize(r);
  internal::ParallelFor(r, [&](std::size_t k) {
    TrainConfig region_config = config;
    region_config.svm.seed = config.svm.seed + k;
    model.trees[k] = TrainCompressed(
        data.slice(segmentation.boundaries[k], segmentation.boundaries[k + 1]),
        region_config);
  });
  if (r > 1) {
    std::vector<std::uint32_t> labels(data.rows());
    for (std::uint32_t k = 0; k < r; ++k) {
      for (std::uint64_t i = segmentation.boundaries[k];
           i < segmentation.boundaries[k + 1]; ++i) {
        labels[i] = k;
      }
    }
    SvmConfig router_config = config.svm;
    router_config.seed = internal::DeriveSeed(config.svm.seed, 0x726f75746572ull);
    model.router = TrainMulticlass(data, labels, r, router_config);
  }
  return model;
}

}  // namespace

std::vector<std::uint64_t> Segmentation::region_sizes() const {
  std::vector<std::uint64_t> sizes;
  for (std::uint32_t k = 0; k < num_regions(); ++k) sizes.push_back(region_size(k));
  return sizes;
}

Segmentation UniformSegmentation(std::uint64_t n, std::uint32_t r) {
  CheckRegionCount(n, r);
  Segmentation seg;
  seg.boundaries.push_back(0);
  for (std::uint32_t k = 0; k < r; ++k) {
    const std::uint64_t size = n / r + (k < n % r ? 1 : 0);
    seg.boundaries.push_back(seg.boundaries.back() + size);
  }
  return seg;
}

Segmentation SummarizeSequence(MatrixView data, std::uint32_t r,
                               SegmentationMethod method) {
  CheckRegionCount(data.rows(), r);
  if (method == SegmentationMethod::kUniform || r == 1) {
    return UniformSegmentation(data.rows(), r);
  }
  return ChangepointSegmentation(data, r);
}

double SegmentationCost(MatrixView data, const Segmentation& seg) {
  double total = 0.0;
  std::vector<double> mean(data.cols());
  for (std::uint32_t k = 0; k < seg.num_regions(); ++k) {
    const std::uint64_t begin = seg.boundaries[k];
    const std::uint64_t end = seg.boundaries[k + 1];
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto row = data.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(end - begin);
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto row = data.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double dv = row[j] - mean[j];
        total += dv * dv;
      }
    }
  }
  return total;
}

RegionizedModel TrainRegionized(const DescriptorSet& ds,
                                const Segmentation& segmentation,
                                const TrainConfig& config) {
  Matrix storage;
  return TrainOnView(Prepared(ds, config, storage), segmentation, config);
}

RegionizedModel TrainRegionized(const DescriptorSet& ds, std::uint32_t r,
                                SegmentationMethod method,
                                const TrainConfig& config) {
  Matrix storage;
  const MatrixView data = Prepared(ds, config, storage);
  return TrainOnView(data, SummarizeSequence(data, r, method), config);
}

RegionizedPrediction PredictRegionized(const RegionizedModel& model,
                                       std::span<const float> q) {
  if (q.size() != model.d) {
    throw DimensionMismatch("query has dimension " + std::to_string(q.size()) +
                            ", model expects " + std::to_string(model.d));
  }
  RegionizedPrediction p;
  if (model.router) p.region = PredictClass(*model.router, q);
  p.local_index = InferCompressed(model.trees[p.region], q);
  p.index = model.offset(p.region) + p.local_index;
  return p;
}

std::uint64_t InferRegionized(const RegionizedModel& model,
                              std::span<const float> q) {
  return PredictRegionized(model, q).index;
}

}  // namespace btel
