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


#ifndef BTEL_TESTS_TEST_UTIL_H_
#define BTEL_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "btel/matrix.h"

namespace btel::testing {

inline std::filesystem::path TempDir(const std::string& name) {
  const char* root = std::getenv("BTEL_TEST_TMPDIR");
  std::filesystem::path dir = root ? std::filesystem::path(root)
                                   : std::filesystem::temp_directory_path();
  dir /= "btel_" + name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                           double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = static_cast<float>(normal(rng));
  return m;
}

// Rows drawn far apart: each row is a scaled random direction, so nearest
// neighbours and linear separations are unambiguous.
inline Matrix SeparableMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m = RandomMatrix(rows, cols, seed);
  for (std::size_t i = 0; i < rows; ++i) {
    double norm = 0;
    for (float v : m.row(i)) norm += double(v) * v;
    norm = std::sqrt(norm);
    for (float& v : m.row(i)) v = static_cast<float>(v / norm);
  }
  return m;
}

// Plain O(N*d) scan, written independently of the library.
inline std::size_t NaiveNearest(MatrixView db, std::span<const float> q) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < db.rows(); ++i) {
    double dist = 0;
    for (std::size_t j = 0; j < db.cols(); ++j) {
      const double diff = double(db(i, j)) - q[j];
      dist += diff * diff;
    }
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

// Bit j (1 = most significant) of i written as a width-bit binary string.
inline int StringBit(std::uint64_t i, int level, int width) {
  std::string s(width, '0');
  for (int k = width - 1; k >= 0; --k, i >>= 1) s[k] = (i & 1) ? '1' : '0';
  return s[level - 1] - '0';
}

}  // namespace btel::testing

#endif  // BTEL_TESTS_TEST_UTIL_H_
