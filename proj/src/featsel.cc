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


#include "btel/featsel.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "btel/error.h"

namespace btel {

std::vector<double> PerFeatureScores(MatrixView data,
                                     std::span<const std::uint8_t> labels) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (labels.size() != n) {
    throw ConfigError("PerFeatureScores: " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(n) + " rows");
  }
  std::size_t count[2] = {0, 0};
  for (std::uint8_t l : labels) ++count[l ? 1 : 0];
  if (count[0] == 0 || count[1] == 0) {
    throw ConfigError("PerFeatureScores: both labels must be present");
  }

  std::vector<double> mean_all(d, 0.0);
  std::vector<double> mean[2] = {std::vector<double>(d, 0.0),
                                 std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = mean[labels[i] ? 1 : 0];
    const auto row = data.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      m[j] += row[j];
      mean_all[j] += row[j];
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    mean_all[j] /= static_cast<double>(n);
    mean[0][j] /= static_cast<double>(count[0]);
    mean[1][j] /= static_cast<double>(count[1]);
  }

  // Centered sums of squares; the ordered-pair sum over a set S equals
  // 2 |S| times its centered sum of squares.
  std::vector<double> total(d, 0.0);
  std::vector<double> within[2] = {std::vector<double>(d, 0.0),
                                   std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const int l = labels[i] ? 1 : 0;
    const auto row = data.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dt = row[j] - mean_all[j];
      const double dw = row[j] - mean[l][j];
      total[j] += dt * dt;
      within[l][j] += dw * dw;
    }
  }
  std::vector<double> scores(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double tss = 2.0 * static_cast<double>(n) * total[j];
    const double wcss = 2.0 * static_cast<double>(count[0]) * within[0][j] +
                        2.0 * static_cast<double>(count[1]) * within[1][j];
    scores[j] = std::max(0.0, tss - wcss);
  }
  return scores;
}

double ThresholdedL1(std::span<const double> scores, double delta) {
  double l1 = 0.0;
  double l2 = 0.0;
  for (double a : scores) {
    const double v = std::max(0.0, a - delta);
    l1 += v;
    l2 += v * v;
  }
  return l2 > 0.0 ? l1 / std::sqrt(l2) : 0.0;
}

FeatureWeights SolveWeights(std::span<const double> scores, double s) {
  if (scores.empty()) throw ConfigError("SolveWeights: empty score vector");
  if (!(s > 0)) throw ConfigError("SolveWeights: s must be > 0");
  double max_score = 0.0;
  for (double a : scores) {
    if (!(a >= 0) || !std::isfinite(a)) {
      throw ConfigError("SolveWeights: scores must be finite and >= 0");
    }
    max_score = std::max(max_score, a);
  }
  if (max_score == 0.0) throw ConfigError("SolveWeights: all scores are zero");

  constexpr double kTolerance = 1e-8;
  const double unthresholded = ThresholdedL1(scores, 0.0);
  const double target =
      std::min(s * static_cast<double>(scores.size()), unthresholded);

  // The l1 norm of the normalized thresholded vector is non-increasing in
  // delta, so bisect; lo always keeps l1 above target with a nonzero vector.
  double delta = 0.0;
  if (unthresholded > target + kTolerance) {
    double lo = 0.0;
    double hi = max_score;
    delta = lo;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double l1 = ThresholdedL1(scores, mid);
      if (l1 > 0.0 && std::abs(l1 - target) <= kTolerance) {
        lo = mid;
        break;
      }
      if (l1 > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    delta = lo;
  }

  FeatureWeights fw;
  fw.s = s;
  fw.threshold = delta;
  fw.w.resize(scores.size());
  double l1 = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    fw.w[j] = std::max(0.0, scores[j] - delta);
    l1 += fw.w[j];
  }
  for (double& w : fw.w) w *= s / l1;
  return fw;
}

std::vector<std::uint32_t> SelectColumns(const FeatureWeights& w,
                                         std::size_t d_prime,
                                         std::span<const double> tiebreak) {
  const std::size_t d = w.w.size();
  if (d_prime < 1 || d_prime > d) {
    throw ConfigError("SelectColumns: d' = " + std::to_string(d_prime) +
                      " outside [1, " + std::to_string(d) + "]");
  }
  if (!tiebreak.empty() && tiebreak.size() != d) {
    throw ConfigError("SelectColumns: tiebreak has " + std::to_string(tiebreak.size()) +
                      " entries for " + std::to_string(d) + " columns");
  }
  std::vector<std::uint32_t> order(d);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + d_prime, order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (w.w[a] != w.w[b]) return w.w[a] > w.w[b];
                      if (!tiebreak.empty() && tiebreak[a] != tiebreak[b]) {
                        return tiebreak[a] > tiebreak[b];
                      }
                      return a < b;
                    });
  order.resize(d_prime);
  std::sort(order.begin(), order.end());
  return order;
}

std::size_t ReducedDimension(double ratio, std::size_t d) {
  if (!(ratio > 0) || ratio > 1) {
    throw ConfigError("dimension ratio " + std::to_string(ratio) +
                      " outside (0, 1]");
  }
  const auto rounded = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(d)));
  return std::clamp<std::size_t>(rounded, 1, d);
}

std::vector<std::uint32_t> SelectFeatures(MatrixView data,
                                          std::span<const std::uint8_t> labels,
                                          std::size_t d_prime, double s) {
  const std::size_t d = data.cols();
  if (d_prime >= d) {
    std::vector<std::uint32_t> all(d);
    std::iota(all.begin(), all.end(), 0u);
    return all;
  }
  const std::vector<double> scores = PerFeatureScores(data, labels);
  if (std::all_of(scores.begin(), scores.end(), [](double a) { return a == 0.0; })) {
    // Nothing separates the clusters; every column ties.
    FeatureWeights flat;
    flat.w.assign(d, 0.0);
    return SelectColumns(flat, d_prime);
  }
  return SelectColumns(SolveWeights(scores, s), d_prime, scores);
}

}  // namespace btel
