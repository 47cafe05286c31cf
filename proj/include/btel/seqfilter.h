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


#ifndef BTEL_SEQFILTER_H_
#define BTEL_SEQFILTER_H_

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace btel {

// Median-window correction of a stream of per-frame location predictions.
//
// Once 2a outputs have been seen, a raw prediction more than a + 1 frames
// away from the lower median m of the last 2a outputs is replaced by
// m + a + 1. The correction always adds, even when the raw value lies below
// m. With a = 0 every prediction passes through.
//
// By default the window holds corrected outputs. With kRaw it holds the raw
// predictions instead, which keeps a lagging output from dragging the median
// further behind.
enum class FilterHistory { kOutputs, kRaw };

class SequenceFilter {
 public:
  explicit SequenceFilter(int window, FilterHistory mode = FilterHistory::kOutputs);

  std::int64_t Filter(std::int64_t raw);

  int window() const { return window_; }
  FilterHistory mode() const { return mode_; }
  std::size_t capacity() const { return 2 * static_cast<std::size_t>(window_); }
  const std::deque<std::int64_t>& history() const { return history_; }
  // Lower median of a full window; only meaningful once warm.
  std::int64_t Median() const;
  bool warm() const { return window_ > 0 && history_.size() == capacity(); }

 private:
  int window_;
  FilterHistory mode_;
  std::deque<std::int64_t> history_;
};

std::vector<std::int64_t> FilterSequence(
    int window, std::span<const std::int64_t> raws,
    FilterHistory mode = FilterHistory::kOutputs);

}  // namespace btel

#endif  // BTEL_SEQFILTER_H_
