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


#ifndef BTEL_MATRIX_H_
#define BTEL_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace btel {

// Non-owning row-major view over a block of contiguous float rows.
class MatrixView {
 public:
  MatrixView() = default;
  MatrixView(const float* data, std::size_t rows, std::size_t cols)
      : data_(data), rows_(rows), cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const float* data() const { return data_; }

  std::span<const float> row(std::size_t i) const {
    return {data_ + i * cols_, cols_};
  }
  float operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  // Rows [begin, end).
  MatrixView slice(std::size_t begin, std::size_t end) const {
    return {data_ + begin * cols_, end - begin, cols_};
  }

 private:
  const float* data_ = nullptr;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<float>& values() const { return data_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<float> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  float operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  float& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  MatrixView view() const { return {data_.data(), rows_, cols_}; }
  operator MatrixView() const { return view(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

}  // namespace btel

#endif  // BTEL_MATRIX_H_
