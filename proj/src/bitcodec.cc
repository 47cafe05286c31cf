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


#include "btel/bitcodec.h"

#include <bit>
#include <string>

#include "btel/error.h"

namespace btel {

int TreeAddress::level() const {
  return std::bit_width(node_index + 1) - 1;
}

int BitsRequired(std::uint64_t n) {
  if (n == 0) throw ConfigError("BitsRequired: n must be >= 1");
  if (n <= 2) return 1;
  return std::bit_width(n - 1);
}

BitCode EncodeIndex(std::uint64_t index, int width) {
  if (width < 1 || width > kMaxCodeWidth) {
    throw ConfigError("EncodeIndex: width " + std::to_string(width) +
                      " outside [1, 62]");
  }
  if (index >= (std::uint64_t{1} << width)) {
    throw ConfigError("EncodeIndex: index " + std::to_string(index) +
                      " does not fit in " + std::to_string(width) + " bits");
  }
  BitCode code;
  code.bits.resize(width);
  for (int level = 1; level <= width; ++level) {
    code.bits[level - 1] = static_cast<std::uint8_t>(IndexBit(index, level, width));
  }
  return code;
}

std::uint64_t DecodeBits(const BitCode& code) {
  std::uint64_t value = 0;
  if (code.bits.empty() || code.width() > kMaxCodeWidth) {
    throw ConfigError("DecodeBits: width " + std::to_string(code.width()) +
                      " outside [1, 62]");
  }
  for (std::uint8_t bit : code.bits) {
    if (bit > 1) throw ConfigError("DecodeBits: bit value " + std::to_string(bit));
    value = (value << 1) | bit;
  }
  return value;
}

IndexRange NodeMembers(TreeAddress node, std::uint64_t n, int width) {
  const int level = node.level();
  if (level > width) {
    throw ConfigError("NodeMembers: node " + std::to_string(node.node_index) +
                      " lies below level " + std::to_string(width));
  }
  const std::uint64_t position = node.node_index - ((std::uint64_t{1} << level) - 1);
  const std::uint64_t span = std::uint64_t{1} << (width - level);
  IndexRange range{position * span, (position + 1) * span};
  if (range.begin > n) range.begin = n;
  if (range.end > n) range.end = n;
  return range;
}

}  // namespace btel
