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


#include "btel/model_io.h"

#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "btel/error.h"

namespace btel {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  template <typename T>
  void PutArray(const std::vector<T>& values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size() * sizeof(T));
  }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T Get(const std::string& field) {
    Need(sizeof(T), field);
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }

  template <typename T>
  std::vector<T> GetArray(std::uint64_t count, const std::string& field) {
    if (count > remaining() / sizeof(T)) Fail(field, "truncated");
    std::vector<T> values(count);
    std::memcpy(values.data(), bytes_.data() + offset_, count * sizeof(T));
    offset_ += count * sizeof(T);
    return values;
  }

  [[noreturn]] void Fail(const std::string& field, const std::string& why) const {
    throw ParseError("model field '" + field + "': " + why + " at byte offset " +
                     std::to_string(offset_));
  }

  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  void Need(std::size_t count, const std::string& field) const {
    if (count > remaining()) Fail(field, "truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

void WriteClassifier(Writer& w, const BinaryClassifier& c) {
  if (const auto* constant = std::get_if<ConstantClassifier>(&c)) {
    w.Put<std::uint8_t>(0);
    w.Put<std::uint8_t>(constant->bit);
    return;
  }
  const auto& h = std::get<Hyperplane>(c);
  w.Put<std::uint8_t>(1);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(h.dim()));
  w.PutArray(h.columns);
  w.PutArray(h.weights);
  w.Put<float>(h.bias);
}

BinaryClassifier ReadClassifier(Reader& r, std::uint32_t d, const std::string& field) {
  const auto kind = r.Get<std::uint8_t>(field + ".kind");
  if (kind == 0) {
    const auto bit = r.Get<std::uint8_t>(field + ".bit");
    if (bit > 1) r.Fail(field + ".bit", "value " + std::to_string(bit) + " is not a bit");
    return ConstantClassifier{bit};
  }
  if (kind != 1) r.Fail(field + ".kind", "unknown classifier kind " + std::to_string(kind));
  const auto dim = r.Get<std::uint32_t>(field + ".d_prime");
  if (dim < 1 || dim > d) {
    r.Fail(field + ".d_prime", "value " + std::to_string(dim) + " outside [1, d]");
  }
  Hyperplane h;
  h.columns = r.GetArray<std::uint32_t>(dim, field + ".columns");
  for (std::size_t j = 0; j < dim; ++j) {
    if (h.columns[j] >= d || (j > 0 && h.columns[j] <= h.columns[j - 1])) {
      r.Fail(field + ".columns", "column ids must be increasing and < d");
    }
  }
  h.weights = r.GetArray<float>(dim, field + ".weights");
  for (float v : h.weights) {
    if (!std::isfinite(v)) r.Fail(field + ".weights", "non-finite weight");
  }
  h.bias = r.Get<float>(field + ".bias");
  if (!std::isfinite(h.bias)) r.Fail(field + ".bias", "non-finite bias");
  return h;
}

void WriteHeader(Writer& w, Scheme scheme, std::uint64_t n, std::uint32_t d,
                 const Segmentation& seg) {
  for (std::uint8_t m : kModelMagic) w.Put<std::uint8_t>(m);
  w.Put<std::uint32_t>(kModelVersion);
  w.Put<std::uint8_t>(static_cast<std::uint8_t>(scheme));
  w.Put<std::uint64_t>(n);
  w.Put<std::uint32_t>(d);
  w.Put<std::uint32_t>(seg.num_regions());
  w.PutArray(seg.boundaries);
}

std::vector<std::uint8_t> Serialize(const RegionizedModel& m) {
  Writer w;
  WriteHeader(w, Scheme::kCompressed, m.n, m.d, m.segmentation);
  if (m.num_regions() > 1) {
    for (const Hyperplane& h : m.router->per_class) {
      w.PutArray(h.weights);
      w.Put<float>(h.bias);
    }
  }
  for (const CompressedTreeModel& tree : m.trees) {
    w.Put<std::uint64_t>(tree.n);
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(tree.b));
    for (const BinaryClassifier& c : tree.levels) WriteClassifier(w, c);
  }
  return w.Take();
}

std::vector<std::uint8_t> Serialize(const FullTreeModel& m) {
  Writer w;
  WriteHeader(w, Scheme::kFull, m.n, m.d, Segmentation{{0, m.n}});
  w.Put<std::uint64_t>(m.n);
  w.Put<std::uint8_t>(static_cast<std::uint8_t>(m.b));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(m.nodes.size()));
  for (const auto& [node, h] : m.nodes) {
    w.Put<std::uint64_t>(node);
    WriteClassifier(w, h);
  }
  return w.Take();
}

}  // namespace

namespace model_format {

std::uint64_t PredictedTreeBytes(std::uint64_t n, std::uint64_t d_prime) {
  if (n <= 1) return kTreeHeaderBytes + kConstantLevelBytes;
  return kTreeHeaderBytes + BitsRequired(n) * HyperplaneLevelBytes(d_prime);
}

std::uint64_t PredictedModelBytes(std::span<const std::uint64_t> region_sizes,
                                  std::uint64_t d, std::uint64_t d_prime) {
  const std::uint64_t r = region_sizes.size();
  std::uint64_t total = kHeaderBytes + BoundaryBytes(r) + RouterBytes(r, d);
  for (std::uint64_t n : region_sizes) total += PredictedTreeBytes(n, d_prime);
  return total;
}

}  // namespace model_format

std::uint64_t ClassifierBytes(const BinaryClassifier& c) {
  if (std::holds_alternative<ConstantClassifier>(c)) {
    return model_format::kConstantLevelBytes;
  }
  return model_format::HyperplaneLevelBytes(std::get<Hyperplane>(c).dim());
}

std::uint64_t ModelSizeBytes(const CompressedTreeModel& model) {
  std::uint64_t total = model_format::kHeaderBytes + model_format::BoundaryBytes(1) +
                        model_format::kTreeHeaderBytes;
  for (const auto& c : model.levels) total += ClassifierBytes(c);
  return total;
}

std::uint64_t ModelSizeBytes(const RegionizedModel& model) {
  const std::uint64_t r = model.num_regions();
  std::uint64_t total = model_format::kHeaderBytes + model_format::BoundaryBytes(r) +
                        model_format::RouterBytes(r, model.d);
  for (const auto& tree : model.trees) {
    total += model_format::kTreeHeaderBytes;
    for (const auto& c : tree.levels) total += ClassifierBytes(c);
  }
  return total;
}

std::uint64_t ModelSizeBytes(const FullTreeModel& model) {
  std::uint64_t total = model_format::kHeaderBytes + model_format::BoundaryBytes(1) +
                        model_format::kTreeHeaderBytes + model_format::kNodeCountBytes;
  for (const auto& [node, h] : model.nodes) {
    total += model_format::kNodeIdBytes + ClassifierBytes(h);
  }
  return total;
}

std::uint64_t ModelSizeBytes(const Model& model) {
  return std::visit([](const auto& m) { return ModelSizeBytes(m); }, model);
}

RegionizedModel AsRegionized(const CompressedTreeModel& tree) {
  RegionizedModel m;
  m.n = tree.n;
  m.d = tree.d;
  m.segmentation.boundaries = {0, tree.n};
  m.trees.push_back(tree);
  return m;
}

std::vector<std::uint8_t> SerializeModel(const Model& model) {
  return std::visit([](const auto& m) { return Serialize(m); }, model);
}

Model DeserializeModel(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (std::size_t i = 0; i < kModelMagic.size(); ++i) {
    if (r.Get<std::uint8_t>("magic") != kModelMagic[i]) r.Fail("magic", "bad magic");
  }
  const auto version = r.Get<std::uint32_t>("version");
  if (version != kModelVersion) {
    r.Fail("version", "unsupported version " + std::to_string(version));
  }
  const auto scheme = r.Get<std::uint8_t>("scheme");
  if (scheme > 1) r.Fail("scheme", "unknown scheme tag " + std::to_string(scheme));
  const auto n = r.Get<std::uint64_t>("N");
  if (n < 1) r.Fail("N", "must be >= 1");
  const auto d = r.Get<std::uint32_t>("d");
  if (d < 1) r.Fail("d", "must be >= 1");
  const auto regions = r.Get<std::uint32_t>("r");
  if (regions < 1 || regions > n) r.Fail("r", "must lie in [1, N]");
  if (scheme == 1 && regions != 1) r.Fail("r", "full-tree models have one region");

  Segmentation seg;
  seg.boundaries = r.GetArray<std::uint64_t>(regions + 1ull, "boundaries");
  if (seg.boundaries.front() != 0 || seg.boundaries.back() != n) {
    r.Fail("boundaries", "must start at 0 and end at N");
  }
  for (std::uint32_t k = 0; k < regions; ++k) {
    if (seg.boundaries[k + 1] <= seg.boundaries[k]) {
      r.Fail("boundaries", "region " + std::to_string(k) + " is empty");
    }
  }

  auto read_tree_header = [&](const std::string& field, std::uint64_t expected_n) {
    const auto tree_n = r.Get<std::uint64_t>(field + ".n");
    if (tree_n != expected_n) {
      r.Fail(field + ".n", "value " + std::to_string(tree_n) + " disagrees with boundaries");
    }
    const auto b = r.Get<std::uint8_t>(field + ".b");
    if (b != BitsRequired(tree_n)) {
      r.Fail(field + ".b", "value " + std::to_string(b) + " does not match n");
    }
    return static_cast<int>(b);
  };

  if (scheme == 1) {
    FullTreeModel m;
    m.n = n;
    m.d = d;
    m.b = read_tree_header("tree", n);
    const auto count = r.Get<std::uint32_t>("node_count");
    if (count >= (std::uint64_t{1} << m.b)) r.Fail("node_count", "exceeds 2^b - 1");
    for (std::uint32_t k = 0; k < count; ++k) {
      const std::string field = "node[" + std::to_string(k) + "]";
      const auto node = r.Get<std::uint64_t>(field + ".id");
      if (node >= (std::uint64_t{1} << m.b) - 1 ||
          (!m.nodes.empty() && node <= m.nodes.rbegin()->first)) {
        r.Fail(field + ".id", "node ids must be increasing internal nodes");
      }
      BinaryClassifier c = ReadClassifier(r, d, field);
      if (!std::holds_alternative<Hyperplane>(c)) {
        r.Fail(field + ".kind", "full-tree nodes must be hyperplanes");
      }
      m.nodes.emplace(node, std::get<Hyperplane>(std::move(c)));
    }
    if (r.remaining() != 0) r.Fail("end", "trailing bytes");
    return m;
  }

  RegionizedModel m;
  m.n = n;
  m.d = d;
  m.segmentation = seg;
  if (regions > 1) {
    MulticlassModel router;
    for (std::uint32_t k = 0; k < regions; ++k) {
      const std::string field = "router[" + std::to_string(k) + "]";
      Hyperplane h;
      h.columns.resize(d);
      for (std::uint32_t j = 0; j < d; ++j) h.columns[j] = j;
      h.weights = r.GetArray<float>(d, field + ".weights");
      h.bias = r.Get<float>(field + ".bias");
      router.per_class.push_back(std::move(h));
    }
    m.router = std::move(router);
  }
  for (std::uint32_t k = 0; k < regions; ++k) {
    const std::string field = "region[" + std::to_string(k) + "]";
    CompressedTreeModel tree;
    tree.d = d;
    tree.n = seg.region_size(k);
    tree.b = read_tree_header(field, tree.n);
    for (int j = 0; j < tree.b; ++j) {
      tree.levels.push_back(
          ReadClassifier(r, d, field + ".level[" + std::to_string(j + 1) + "]"));
    }
    m.trees.push_back(std::move(tree));
  }
  if (r.remaining() != 0) r.Fail("end", "trailing bytes");
  return m;
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot replace " + path.string() + ": " + ec.message());
  }
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& text) {
  WriteFileAtomic(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void SaveModel(const Model& model, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeModel(model));
}

Model LoadModel(const std::filesystem::path& path) {
  return DeserializeModel(ReadFileBytes(path));
}

std::uint64_t Predict(const Model& model, std::span<const float> q) {
  if (const auto* full = std::get_if<FullTreeModel>(&model)) return InferFull(*full, q);
  return InferRegionized(std::get<RegionizedModel>(model), q);
}

std::uint64_t ModelPlaces(const Model& model) {
  return std::visit([](const auto& m) { return m.n; }, model);
}

std::uint32_t ModelDim(const Model& model) {
  return std::visit([](const auto& m) { return m.d; }, model);
}

std::uint32_t ModelRegions(const Model& model) {
  if (const auto* rm = std::get_if<RegionizedModel>(&model)) return rm->num_regions();
  return 1;
}

std::size_t ModelReducedDim(const Model& model) {
  std::size_t dim = 0;
  if (const auto* full = std::get_if<FullTreeModel>(&model)) {
    for (const auto& [node, h] : full->nodes) dim = std::max(dim, h.dim());
    return dim;
  }
  for (const auto& tree : std::get<RegionizedModel>(model).trees) {
    for (const auto& c : tree.levels) {
      if (const auto* h = std::get_if<Hyperplane>(&c)) dim = std::max(dim, h->dim());
    }
  }
  return dim;
}

}  // namespace btel
