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


#include "btel/seqfilter.h"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "btel/error.h"

namespace btel {

SequenceFilter::SequenceFilter(int window, FilterHistory mode)
    : window_(window), mode_(mode) {
  if (window < 0) throw ConfigError("filter window must be >= 0, got " + std::to_string(window));
}

std::int64_t SequenceFilter::Median() const {
  std::vector<std::int64_t> sorted(history_.begin(), history_.end());
  const auto lower = sorted.begin() + (window_ - 1);
  std::nth_element(sorted.begin(), lower, sorted.end());
  return *lower;
}

std::int64_t SequenceFilter::Filter(std::int64_t raw) {
  if (window_ == 0) return raw;
  std::int64_t out = raw;
  if (warm()) {
    const std::int64_t m = Median();
    const std::int64_t tolerance = window_ + 1;
    if (std::llabs(raw - m) > tolerance) out = m + tolerance;
  }
  history_.push_back(mode_ == FilterHistory::kRaw ? raw : out);
  if (history_.size() > capacity()) history_.pop_front();
  return out;
}

std::vector<std::int64_t> FilterSequence(int window,
                                         std::span<const std::int64_t> raws,
                                         FilterHistory mode) {
  SequenceFilter filter(window, mode);
  std::vector<std::int64_t> out;
  out.reserve(raws.size());
  for (std::int64_t raw : raws) out.push_back(filter.Filter(raw));
  return out;
}

}  // namespace btel
