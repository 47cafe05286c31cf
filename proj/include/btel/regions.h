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


#ifndef BTEL_REGIONS_H_
#define BTEL_REGIONS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "btel/dataset.h"
#include "btel/svm.h"
#include "btel/tree.h"

namespace btel {

// Region k covers [boundaries[k], boundaries[k + 1]).
struct Segmentation {
  std::vector<std::uint64_t> boundaries;

  std::uint32_t num_regions() const {
    return boundaries.empty() ? 0
                              : static_cast<std::uint32_t>(boundaries.size() - 1);
  }
  std::uint64_t region_size(std::uint32_t k) const {
    return boundaries[k + 1] - boundaries[k];
  }
  std::vector<std::uint64_t> region_sizes() const;
  bool operator==(const Segmentation&) const = default;
};

enum class SegmentationMethod { kChangepoint, kUniform };

// Splits the ordered rows into r contiguous non-empty regions. Changepoint
// runs an exact dynamic program minimizing total within-segment SSE.
Segmentation SummarizeSequence(MatrixView data, std::uint32_t r,
                               SegmentationMethod method);

// Near-equal split, earlier regions larger by at most one.
Segmentation UniformSegmentation(std::uint64_t n, std::uint32_t r);

// Sum over segments of squared deviations from each segment's mean.
double SegmentationCost(MatrixView data, const Segmentation& seg);

struct RegionizedModel {
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  Segmentation segmentation;
  std::optional<MulticlassModel> router;  // present iff r > 1
  std::vector<CompressedTreeModel> trees;

  std::uint32_t num_regions() const { return segmentation.num_regions(); }
  std::uint64_t offset(std::uint32_t k) const {
    return segmentation.boundaries[k];
  }
};

RegionizedModel TrainRegionized(const DescriptorSet& ds, std::uint32_t r,
                                SegmentationMethod method,
                                const TrainConfig& config);
// Trains on a precomputed segmentation.
RegionizedModel TrainRegionized(const DescriptorSet& ds,
                                const Segmentation& segmentation,
                                const TrainConfig& config);

struct RegionizedPrediction {
  std::uint32_t region = 0;
  std::uint64_t local_index = 0;
  std::uint64_t index = 0;
};

RegionizedPrediction PredictRegionized(const RegionizedModel& model,
                                       std::span<const float> q);
std::uint64_t InferRegionized(const RegionizedModel& model,
                              std::span<const float> q);

}  // namespace btel

#endif  // BTEL_REGIONS_H_
