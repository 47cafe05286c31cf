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

#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "btel/error.h"
#include "test_util.h"

namespace btel {
namespace {

RegionizedModel RandomRegionized(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = 3 + rng() % 60;
  const std::size_t d = 2 + rng() % 20;
  const std::uint32_t r = 1 + rng() % 3;
  DescriptorSet ds;
  ds.descriptors = testing::SeparableMatrix(n, d, seed);
  TrainConfig c;
  c.dim_ratio = 0.1 + 0.9 * (rng() % 10) / 10.0;
  c.svm.epochs = 2;
  c.svm.seed = seed;
  return TrainRegionized(ds, r, SegmentationMethod::kUniform, c);
}

TEST(ModelSize, MatchesSerializedLength) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = RandomRegionized(seed);
    ASSERT_EQ(ModelSizeBytes(m), SerializeModel(m).size()) << seed;
  }
}

TEST(ModelSize, FullTreeMatchesSerializedLength) {
  for (std::size_t n : {1u, 2u, 5u, 8u, 13u}) {
    const Matrix x = testing::SeparableMatrix(n, 6, n);
    const Model m = TrainFull(x, TrainConfig{});
    EXPECT_EQ(ModelSizeBytes(m), SerializeModel(m).size()) << n;
  }
}

TEST(ModelSize, PredictionIsExactForCompressedTrees) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RegionizedModel m = RandomRegionized(seed);
    const std::size_t d_prime = std::get<Hyperplane>(m.trees[0].levels[0]).dim();
    EXPECT_EQ(model_format::PredictedModelBytes(m.segmentation.region_sizes(), m.d, d_prime),
              SerializeModel(m).size());
  }
}

// Header plus boundaries plus b hyperplane levels, counted by hand.
TEST(ModelSize, HandCountedLayout) {
  const std::uint64_t d_prime = 64;
  const std::uint64_t level = 1 + 4 + 8 * d_prime + 4;
  const std::uint64_t fixed = 29 + 16 + 9;
  const std::vector<std::uint64_t> small = {64}, large = {8192};
  EXPECT_EQ(model_format::PredictedModelBytes(small, 4096, d_prime), fixed + 6 * level);
  EXPECT_EQ(model_format::PredictedModelBytes(large, 4096, d_prime), fixed + 13 * level);
}

TEST(Serialize, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Model m = RandomRegionized(seed);
    const auto bytes = SerializeModel(m);
    EXPECT_EQ(SerializeModel(DeserializeModel(bytes)), bytes);
  }
  const Model full = TrainFull(testing::SeparableMatrix(13, 5, 1), TrainConfig{});
  const auto bytes = SerializeModel(full);
  EXPECT_EQ(SerializeModel(DeserializeModel(bytes)), bytes);
}

TEST(Serialize, RoundTripPredictionsOnRandomQueries) {
  DescriptorSet ds;
  ds.descriptors = testing::SeparableMatrix(90, 24, 12);
  const Model regionized = TrainRegionized(ds, 3, SegmentationMethod::kChangepoint, TrainConfig{});
  const Model full = TrainFull(ds, TrainConfig{});
  const Matrix queries = testing::RandomMatrix(1000, 24, 13);
  for (const Model* m : {&regionized, &full}) {
    const Model back = DeserializeModel(SerializeModel(*m));
    for (std::size_t i = 0; i < queries.rows(); ++i) {
      ASSERT_EQ(Predict(back, queries.row(i)), Predict(*m, queries.row(i)));
    }
  }
}

TEST(Serialize, SingleRegionHasNoRouterBlock) {
  DescriptorSet ds;
  ds.descriptors = testing::SeparableMatrix(20, 8, 14);
  const Model m = TrainRegionized(ds, 1, SegmentationMethod::kChangepoint, TrainConfig{});
  const auto bytes = SerializeModel(m);
  const auto& back = std::get<RegionizedModel>(DeserializeModel(bytes));
  EXPECT_FALSE(back.router.has_value());
  EXPECT_EQ(back.num_regions(), 1u);
  // header, two boundaries, then the tree header straight away
  std::uint64_t tree_n = 0;
  std::memcpy(&tree_n, bytes.data() + 29 + 16, 8);
  EXPECT_EQ(tree_n, 20u);
}

TEST(Serialize, MagicAndVersion) {
  const auto bytes = SerializeModel(RandomRegionized(1));
  EXPECT_TRUE(std::equal(kModelMagic.begin(), kModelMagic.end(), bytes.begin()));
  EXPECT_EQ(bytes[8], kModelVersion);
}

TEST(Deserialize, CorruptionNamesField) {
  const auto good = SerializeModel(RandomRegionized(2));
  auto check = [](std::vector<std::uint8_t> bytes, const std::string& needle) {
    try {
      DeserializeModel(bytes);
      ADD_FAILURE() << "accepted corrupt model";
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  auto bad = good;
  bad[0] = 'X';
  check(bad, "magic");
  bad = good;
  bad[8] = 9;
  check(bad, "version");
  bad = good;
  bad[12] = 7;
  check(bad, "scheme");
  bad = good;
  bad.push_back(0);
  check(bad, "trailing");
  bad = good;
  bad.resize(bad.size() - 3);
  check(bad, "truncated");
}

TEST(Deserialize, EveryTruncationRejected) {
  const auto good = SerializeModel(RandomRegionized(3));
  for (std::size_t len = 0; len < good.size(); ++len) {
    std::vector<std::uint8_t> cut(good.begin(), good.begin() + len);
    ASSERT_THROW(DeserializeModel(cut), ParseError) << len;
  }
}

TEST(Files, SaveLoadAndMissing) {
  const auto dir = testing::TempDir("model_io");
  const Model m = RandomRegionized(4);
  SaveModel(m, dir / "m.mdl");
  EXPECT_EQ(SerializeModel(LoadModel(dir / "m.mdl")), SerializeModel(m));
  EXPECT_THROW(LoadModel(dir / "missing.mdl"), IoError);
  EXPECT_THROW(SaveModel(m, "/proc/btel_cannot_write/m.mdl"), IoError);
}

TEST(Predict, DispatchesOnScheme) {
  const Matrix x = testing::SeparableMatrix(8, 16, 9);
  TrainConfig c;
  c.dim_ratio = 1.0;
  const Model full = TrainFull(x, c);
  const Model compressed = AsRegionized(TrainCompressed(x, c));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(Predict(full, x.row(i)), InferFull(std::get<FullTreeModel>(full), x.row(i)));
    EXPECT_EQ(Predict(compressed, x.row(i)),
              InferRegionized(std::get<RegionizedModel>(compressed), x.row(i)));
  }
  EXPECT_EQ(ModelPlaces(full), 8u);
  EXPECT_EQ(ModelDim(compressed), 16u);
  EXPECT_EQ(ModelRegions(compressed), 1u);
}

}  // namespace
}  // namespace btel
