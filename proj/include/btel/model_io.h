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


#ifndef BTEL_MODEL_IO_H_
#define BTEL_MODEL_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "btel/regions.h"
#include "btel/tree.h"

namespace btel {

// BTEL-MDL, version 1. All integers and floats little-endian.
//
//   magic "BTELMDL\0" | version u32 | scheme u8 | N u64 | d u32 | r u32
//   boundaries (r + 1) x u64
//   router, iff r > 1: r x (d x f32 weights, f32 bias)
//   scheme 0, per region: n u64 | b u8 | b x level
//   scheme 1 (r == 1):    n u64 | b u8 | count u32 | count x (node u64, level)
//   level: kind u8, then kind 0: bit u8
//                        kind 1: d' u32, d' x u32 column, d' x f32, f32 bias
inline constexpr std::array<std::uint8_t, 8> kModelMagic = {
    0x42, 0x54, 0x45, 0x4C, 0x4D, 0x44, 0x4C, 0x00};
inline constexpr std::uint32_t kModelVersion = 1;

using Model = std::variant<RegionizedModel, FullTreeModel>;

namespace model_format {

inline constexpr std::uint64_t kHeaderBytes = 8 + 4 + 1 + 8 + 4 + 4;
inline constexpr std::uint64_t kTreeHeaderBytes = 8 + 1;
inline constexpr std::uint64_t kConstantLevelBytes = 1 + 1;
inline constexpr std::uint64_t kNodeCountBytes = 4;
inline constexpr std::uint64_t kNodeIdBytes = 8;

inline constexpr std::uint64_t BoundaryBytes(std::uint64_t r) {
  return (r + 1) * 8;
}
inline constexpr std::uint64_t RouterBytes(std::uint64_t r, std::uint64_t d) {
  return r > 1 ? r * (d * 4 + 4) : 0;
}
// kind + d' + column ids + weights + bias.
inline constexpr std::uint64_t HyperplaneLevelBytes(std::uint64_t d_prime) {
  return 1 + 4 + d_prime * 4 + d_prime * 4 + 4;
}
// Compressed tree over |n| places where every hyperplane level has d'
// dimensions; a single place needs one constant level.
std::uint64_t PredictedTreeBytes(std::uint64_t n, std::uint64_t d_prime);
// Whole regionized file for the given region sizes and d'.
std::uint64_t PredictedModelBytes(std::span<const std::uint64_t> region_sizes,
                                  std::uint64_t d, std::uint64_t d_prime);

}  // namespace model_format

std::uint64_t ClassifierBytes(const BinaryClassifier& c);
std::uint64_t ModelSizeBytes(const CompressedTreeModel& model);
std::uint64_t ModelSizeBytes(const FullTreeModel& model);
std::uint64_t ModelSizeBytes(const RegionizedModel& model);
std::uint64_t ModelSizeBytes(const Model& model);

// Wraps a single tree as the equivalent one-region model.
RegionizedModel AsRegionized(const CompressedTreeModel& tree);

std::vector<std::uint8_t> SerializeModel(const Model& model);
// Throws ParseError naming the failing field.
Model DeserializeModel(std::span<const std::uint8_t> bytes);

void SaveModel(const Model& model, const std::filesystem::path& path);
Model LoadModel(const std::filesystem::path& path);

std::uint64_t Predict(const Model& model, std::span<const float> q);
std::uint64_t ModelPlaces(const Model& model);
std::uint32_t ModelDim(const Model& model);
std::uint32_t ModelRegions(const Model& model);
// Largest hyperplane dimension among the tree classifiers (0 if none).
std::size_t ModelReducedDim(const Model& model);

// Writes |bytes| to a sibling temp file and renames it over |path|.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes);
void WriteFileAtomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);

}  // namespace btel

#endif  // BTEL_MODEL_IO_H_
