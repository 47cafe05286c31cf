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


#include "btel/dataset.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "btel/error.h"
#include "btel/model_io.h"

namespace btel {
namespace {

constexpr std::uint8_t kDescriptorMagic[8] = {0x42, 0x54, 0x45, 0x4C,
                                              0x44, 0x53, 0x43, 0x00};
constexpr std::uint32_t kDescriptorVersion = 1;
constexpr std::size_t kDescriptorHeaderBytes = 8 + 4 + 8 + 4 + 4;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void Put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T Get(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

std::string Offset(std::size_t offset) {
  return " at byte offset " + std::to_string(offset);
}

DescriptorSet LoadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<float> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      char* end = nullptr;
      const float v = std::strtof(field.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (field.empty() || end == field.c_str() || *end != '\0') {
        throw ParseError(path.string() + ": malformed value '" + field +
                         "' at line " + std::to_string(line_no));
      }
      if (!std::isfinite(v)) {
        throw ParseError(path.string() + ": non-finite value at line " +
                         std::to_string(line_no));
      }
      values.push_back(v);
      ++count;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       " has " + std::to_string(count) + " values, expected " +
                       std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0 || cols == 0) {
    throw ParseError(path.string() + ": no rows at line " + std::to_string(line_no));
  }
  DescriptorSet ds;
  ds.descriptors = Matrix(rows, cols, std::move(values));
  ds.source_tag = path.filename().string();
  return ds;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ConfigError("Matrix: " + std::to_string(data_.size()) +
                      " values for a " + std::to_string(rows_) + "x" +
                      std::to_string(cols_) + " matrix");
  }
}

std::vector<std::uint8_t> EncodeDescriptors(const DescriptorSet& ds) {
  std::vector<std::uint8_t> out;
  out.reserve(kDescriptorHeaderBytes + ds.descriptors.values().size() * 4);
  out.insert(out.end(), std::begin(kDescriptorMagic), std::end(kDescriptorMagic));
  Put<std::uint32_t>(out, kDescriptorVersion);
  Put<std::uint64_t>(out, ds.size());
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
  Put<float>(out, ds.meters_per_frame);
  const auto& v = ds.descriptors.values();
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
  out.insert(out.end(), p, p + v.size() * sizeof(float));
  return out;
}

DescriptorSet DecodeDescriptors(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kDescriptorHeaderBytes) {
    throw ParseError("truncated descriptor header" + Offset(bytes.size()));
  }
  for (std::size_t i = 0; i < 8; ++i) {
    if (bytes[i] != kDescriptorMagic[i]) throw ParseError("bad magic" + Offset(i));
  }
  const auto version = Get<std::uint32_t>(bytes, 8);
  if (version != kDescriptorVersion) {
    throw ParseError("unsupported version " + std::to_string(version) + Offset(8));
  }
  const auto n = Get<std::uint64_t>(bytes, 12);
  const auto d = Get<std::uint32_t>(bytes, 20);
  const auto meters = Get<float>(bytes, 24);
  if (n == 0) throw ParseError("N must be >= 1" + Offset(12));
  if (d == 0) throw ParseError("d must be >= 1" + Offset(20));
  if (!std::isfinite(meters)) throw ParseError("non-finite meters_per_frame" + Offset(24));
  const std::uint64_t payload = bytes.size() - kDescriptorHeaderBytes;
  if (n > payload / 4 / d || payload != n * d * 4) {
    throw ParseError("payload of " + std::to_string(payload) +
                     " bytes does not match N=" + std::to_string(n) +
                     ", d=" + std::to_string(d) + Offset(kDescriptorHeaderBytes));
  }
  std::vector<float> values(n * d);
  std::memcpy(values.data(), bytes.data() + kDescriptorHeaderBytes, payload);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ParseError("non-finite value" + Offset(kDescriptorHeaderBytes + 4 * i));
    }
  }
  DescriptorSet ds;
  ds.descriptors = Matrix(n, d, std::move(values));
  ds.meters_per_frame = meters;
  return ds;
}

DescriptorSet LoadDescriptors(const std::filesystem::path& path,
                              DescriptorFormat format) {
  if (format == DescriptorFormat::kCsv) return LoadCsv(path);
  DescriptorSet ds = DecodeDescriptors(ReadFileBytes(path));
  ds.source_tag = path.filename().string();
  return ds;
}

DescriptorSet LoadDescriptors(const std::filesystem::path& path) {
  return LoadDescriptors(path, path.extension() == ".csv"
                                   ? DescriptorFormat::kCsv
                                   : DescriptorFormat::kBinary);
}

void SaveDescriptors(const DescriptorSet& ds, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeDescriptors(ds));
}

void SaveDescriptorsCsv(const DescriptorSet& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(9);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.descriptors.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  WriteFileAtomic(path, out.str());
}

std::vector<std::int64_t> LoadGroundTruth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::int64_t> gt;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(line, &used);
      if (v < -1) throw std::invalid_argument("negative");
      gt.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad ground truth at line " +
                       std::to_string(line_no));
    }
  }
  return gt;
}

void SaveGroundTruth(const std::vector<std::int64_t>& ground_truth,
                     const std::filesystem::path& path) {
  std::string text;
  for (std::int64_t g : ground_truth) text += std::to_string(g) + '\n';
  WriteFileAtomic(path, text);
}

std::pair<DescriptorSet, QuerySet> GenerateSynthetic(const SyntheticParams& p) {
  if (p.n == 0 || p.d == 0) throw ConfigError("GenerateSynthetic: n and d must be >= 1");
  if (!(p.walk_sigma >= 0) || !(p.query_sigma >= 0)) {
    throw ConfigError("GenerateSynthetic: sigmas must be >= 0");
  }
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto normalize_into = [&](std::span<const double> v, std::span<float> out) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < v.size(); ++j) {
      out[j] = static_cast<float>(v[j] / norm);
    }
  };

  Matrix db(p.n, p.d);
  std::vector<double> state(p.d);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (auto& x : state) {
      x = gauss(rng);
      norm += x * x;
    }
  }
  normalize_into(state, db.row(0));
  for (std::size_t i = 1; i < p.n; ++i) {
    const auto prev = db.row(i - 1);
    for (std::size_t j = 0; j < p.d; ++j) {
      state[j] = prev[j] + p.walk_sigma * gauss(rng);
    }
    normalize_into(state, db.row(i));
  }

  Matrix queries(p.n, p.d);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto row = db.row(i);
    if (p.query_sigma == 0.0) {
      std::copy(row.begin(), row.end(), queries.row(i).begin());
      continue;
    }
    for (std::size_t j = 0; j < p.d; ++j) {
      state[j] = row[j] + p.query_sigma * gauss(rng);
    }
    normalize_into(state, queries.row(i));
  }

  DescriptorSet ds;
  ds.descriptors = std::move(db);
  ds.source_tag = "synthetic";
  QuerySet qs;
  qs.descriptors = std::move(queries);
  qs.ground_truth.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) qs.ground_truth[i] = static_cast<std::int64_t>(i);
  return {std::move(ds), std::move(qs)};
}

Matrix L2Normalize(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = out.row(i);
    double norm = 0.0;
    for (float x : row) norm += static_cast<double>(x) * x;
    if (norm == 0.0) {
      throw ConfigError("L2Normalize: row " + std::to_string(i) + " is all zero");
    }
    norm = std::sqrt(norm);
    for (float& x : row) x = static_cast<float>(x / norm);
  }
  return out;
}

DescriptorSet L2Normalize(const DescriptorSet& ds) {
  DescriptorSet out = ds;
  out.descriptors = L2Normalize(ds.descriptors);
  return out;
}

}  // namespace btel
