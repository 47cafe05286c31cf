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


#ifndef BTEL_FEATSEL_H_
#define BTEL_FEATSEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "btel/matrix.h"

namespace btel {

inline constexpr double kDefaultSparsity = 0.1;

struct FeatureWeights {
  std::vector<double> w;  // non-negative, ||w||_1 == s
  double s = kDefaultSparsity;
  double threshold = 0.0;  // soft-threshold offset applied to the scores
};

// Per-column cross-cluster dissimilarity TSS_j - WCSS_j, where both sums run
// over ordered pairs p != q (total set and per cluster respectively).
// Requires both labels to be present.
std::vector<double> PerFeatureScores(MatrixView data,
                                     std::span<const std::uint8_t> labels);

// Soft-thresholds the scores, w = max(0, a - delta), with delta chosen by
// bisection so the unit-l2 direction has l1 norm min(s * d, l1 at delta = 0);
// the result is rescaled to ||w||_1 = s. Ranking of nonzero entries follows
// the scores.
FeatureWeights SolveWeights(std::span<const double> scores,
                            double s = kDefaultSparsity);

// l1 norm of the unit-l2 normalized max(0, scores - delta); 0 if all vanish.
double ThresholdedL1(std::span<const double> scores, double delta);

// The |d_prime| columns with the largest weights, returned in ascending order.
// Equal weights are ordered by |tiebreak| when given, then by lower index.
std::vector<std::uint32_t> SelectColumns(const FeatureWeights& w,
                                         std::size_t d_prime,
                                         std::span<const double> tiebreak = {});

// d' = max(1, round(ratio * d)), capped at d.
std::size_t ReducedDimension(double ratio, std::size_t d);

// Scores, weights and top-d' selection in one call.
std::vector<std::uint32_t> SelectFeatures(MatrixView data,
                                          std::span<const std::uint8_t> labels,
                                          std::size_t d_prime,
                                          double s = kDefaultSparsity);

}  // namespace btel

#endif  // BTEL_FEATSEL_H_
