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


#ifndef BTEL_DATASET_H_
#define BTEL_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "btel/matrix.h"

namespace btel {

inline constexpr float kDefaultMetersPerFrame = 20.0f;

// An ordered database of place descriptors. Row i is map location i.
struct DescriptorSet {
  Matrix descriptors;
  float meters_per_frame = kDefaultMetersPerFrame;
  std::string source_tag;

  std::size_t size() const { return descriptors.rows(); }
  std::size_t dim() const { return descriptors.cols(); }
};

// Query descriptors plus the true database index of each (-1 if unknown).
struct QuerySet {
  Matrix descriptors;
  std::vector<std::int64_t> ground_truth;
};

enum class DescriptorFormat { kBinary, kCsv };

// Throws ParseError (with byte or line offset) or IoError.
DescriptorSet LoadDescriptors(const std::filesystem::path& path,
                              DescriptorFormat format);
// Guesses the format from the extension: ".csv" is CSV, anything else binary.
DescriptorSet LoadDescriptors(const std::filesystem::path& path);

// Writes the BTEL-DSC binary form. The write is atomic (temp file + rename).
void SaveDescriptors(const DescriptorSet& ds, const std::filesystem::path& path);
void SaveDescriptorsCsv(const DescriptorSet& ds,
                        const std::filesystem::path& path);

std::vector<std::uint8_t> EncodeDescriptors(const DescriptorSet& ds);
DescriptorSet DecodeDescriptors(const std::vector<std::uint8_t>& bytes);

// One integer per line; -1 marks an unknown location.
std::vector<std::int64_t> LoadGroundTruth(const std::filesystem::path& path);
void SaveGroundTruth(const std::vector<std::int64_t>& ground_truth,
                     const std::filesystem::path& path);

struct SyntheticParams {
  std::size_t n = 1000;
  std::size_t d = 128;
  double walk_sigma = 0.05;
  double query_sigma = 0.01;
  std::uint64_t seed = 0;
};

// Smooth unit-norm random walk plus noisy per-row queries with identity
// ground truth. Pure function of |params|.
std::pair<DescriptorSet, QuerySet> GenerateSynthetic(
    const SyntheticParams& params);

// Throws ConfigError naming the first all-zero row.
Matrix L2Normalize(const Matrix& m);
DescriptorSet L2Normalize(const DescriptorSet& ds);

}  // namespace btel

#endif  // BTEL_DATASET_H_
