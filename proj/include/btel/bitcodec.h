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


#ifndef BTEL_BITCODEC_H_
#define BTEL_BITCODEC_H_

#include <cstdint>
#include <vector>

namespace btel {

inline constexpr int kMaxCodeWidth = 62;

// MSB-first binary code of a database index. bits[0] is the level-1 bit.
struct BitCode {
  std::vector<std::uint8_t> bits;

  int width() const { return static_cast<int>(bits.size()); }
  bool operator==(const BitCode&) const = default;
};

// Heap-style node numbering: root 0, children of j are 2j+1 (zero) and
// 2j+2 (one).
struct TreeAddress {
  std::uint64_t node_index = 0;

  int level() const;
  TreeAddress zero_child() const { return {2 * node_index + 1}; }
  TreeAddress one_child() const { return {2 * node_index + 2}; }
};

// Half-open interval of database indices.
struct IndexRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return size() == 0; }
  bool contains(std::uint64_t i) const { return i >= begin && i < end; }
  bool operator==(const IndexRange&) const = default;
};

// Smallest b >= 1 with n <= 2^b.
int BitsRequired(std::uint64_t n);

BitCode EncodeIndex(std::uint64_t index, int width);
std::uint64_t DecodeBits(const BitCode& code);

// Bit |level| (1-based, MSB first) of |index| in a |width|-bit code.
inline int IndexBit(std::uint64_t index, int level, int width) {
  return static_cast<int>((index >> (width - level)) & 1u);
}

// Indices whose first level(node) bits spell the root-to-node path,
// intersected with [0, n).
IndexRange NodeMembers(TreeAddress node, std::uint64_t n, int width);

}  // namespace btel

#endif  // BTEL_BITCODEC_H_
