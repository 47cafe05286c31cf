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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "btel/error.h"
#include "btel/eval.h"
#include "btel/model_io.h"
#include "test_util.h"

namespace btel {
namespace {

DescriptorSet MakeSet(std::size_t n, std::size_t d, std::uint64_t seed) {
  DescriptorSet ds;
  ds.descriptors = testing::RandomMatrix(n, d, seed);
  ds.meters_per_frame = 12.5f;
  return ds;
}

TEST(DescriptorCodec, HeaderLayout) {
  DescriptorSet ds = MakeSet(8, 3, 1);
  const auto bytes = EncodeDescriptors(ds);
  ASSERT_EQ(bytes.size(), 28u + 8 * 3 * 4);
  const std::vector<std::uint8_t> magic = {0x42, 0x54, 0x45, 0x4C, 0x44, 0x53, 0x43, 0x00};
  EXPECT_TRUE(std::equal(magic.begin(), magic.end(), bytes.begin()));
  EXPECT_EQ(bytes[8], 1);   // version, little-endian
  EXPECT_EQ(bytes[12], 8);  // N
  EXPECT_EQ(bytes[20], 3);  // d
}

TEST(DescriptorCodec, RoundTripIsBitIdentical) {
  DescriptorSet ds = MakeSet(17, 9, 2);
  const DescriptorSet back = DecodeDescriptors(EncodeDescriptors(ds));
  EXPECT_EQ(back.descriptors, ds.descriptors);
  EXPECT_EQ(back.meters_per_frame, ds.meters_per_frame);
}

TEST(DescriptorCodec, SingletonRoundTrips) {
  DescriptorSet ds = MakeSet(1, 1, 3);
  EXPECT_EQ(DecodeDescriptors(EncodeDescriptors(ds)).descriptors, ds.descriptors);
}

TEST(DescriptorCodec, ErrorsNameTheOffset) {
  auto bytes = EncodeDescriptors(MakeSet(2, 2, 4));
  auto bad_magic = bytes;
  bad_magic[3] = 'x';
  try {
    DecodeDescriptors(bad_magic);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 3"), std::string::npos) << e.what();
  }
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(DecodeDescriptors(truncated), ParseError);

  auto non_finite = bytes;
  const float nan = std::nanf("");
  std::memcpy(non_finite.data() + 28 + 4, &nan, 4);
  try {
    DecodeDescriptors(non_finite);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 32"), std::string::npos) << e.what();
  }
}

TEST(DescriptorFiles, SaveLoadSaveIsByteIdentical) {
  const auto dir = testing::TempDir("dataset_files");
  DescriptorSet ds = MakeSet(8, 4096, 5);
  SaveDescriptors(ds, dir / "a.btel");
  const DescriptorSet loaded = LoadDescriptors(dir / "a.btel");
  EXPECT_EQ(loaded.size(), 8u);
  EXPECT_EQ(loaded.dim(), 4096u);
  SaveDescriptors(loaded, dir / "b.btel");
  EXPECT_EQ(ReadFileBytes(dir / "a.btel"), ReadFileBytes(dir / "b.btel"));
}

TEST(DescriptorFiles, CsvRoundTrip) {
  const auto dir = testing::TempDir("dataset_csv");
  DescriptorSet ds = MakeSet(5, 7, 6);
  SaveDescriptorsCsv(ds, dir / "a.csv");
  EXPECT_EQ(LoadDescriptors(dir / "a.csv").descriptors, ds.descriptors);
}

TEST(DescriptorFiles, RaggedCsvNamesLine) {
  const auto dir = testing::TempDir("dataset_ragged");
  std::ofstream(dir / "r.csv") << "1,2,3\n4,5,6\n7,8\n";
  try {
    LoadDescriptors(dir / "r.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(DescriptorFiles, MissingFileIsIoError) {
  EXPECT_THROW(LoadDescriptors("/nonexistent/dir/x.btel"), IoError);
}

TEST(DescriptorFiles, UnwritableLocationIsIoError) {
  EXPECT_THROW(SaveDescriptors(MakeSet(1, 1, 0), "/proc/btel_cannot_write/x.btel"), IoError);
}

TEST(GroundTruth, RoundTripWithUnknowns) {
  const auto dir = testing::TempDir("dataset_gt");
  const std::vector<std::int64_t> gt = {0, 5, -1, 3};
  SaveGroundTruth(gt, dir / "g.gt");
  EXPECT_EQ(LoadGroundTruth(dir / "g.gt"), gt);
}

TEST(Synthetic, ZeroQueryNoiseCopiesRows) {
  auto [ds, qs] = GenerateSynthetic({.n = 50, .d = 16, .walk_sigma = 0.1,
                                     .query_sigma = 0.0, .seed = 3});
  EXPECT_EQ(ds.descriptors, qs.descriptors);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(qs.ground_truth[i], std::int64_t(i));
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticParams p{.n = 40, .d = 8, .walk_sigma = 0.2, .query_sigma = 0.05, .seed = 11};
  auto a = GenerateSynthetic(p);
  auto b = GenerateSynthetic(p);
  EXPECT_EQ(a.first.descriptors, b.first.descriptors);
  EXPECT_EQ(a.second.descriptors, b.second.descriptors);
  p.seed = 12;
  EXPECT_FALSE(GenerateSynthetic(p).first.descriptors == a.first.descriptors);
}

TEST(Synthetic, RowsAreUnitLength) {
  auto [ds, qs] = GenerateSynthetic({.n = 30, .d = 12, .walk_sigma = 0.3,
                                     .query_sigma = 0.1, .seed = 1});
  for (const Matrix* m : {&ds.descriptors, &qs.descriptors}) {
    for (std::size_t i = 0; i < m->rows(); ++i) {
      double norm = 0;
      for (float v : m->row(i)) norm += double(v) * v;
      EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-6);
    }
  }
}

TEST(Synthetic, SmallNoiseNearestNeighbourRecall) {
  auto [ds, qs] = GenerateSynthetic({.n = 1000, .d = 128, .walk_sigma = 0.05,
                                     .query_sigma = 0.005, .seed = 9});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < qs.descriptors.rows(); ++i) {
    hits += testing::NaiveNearest(ds.descriptors, qs.descriptors.row(i)) == i;
  }
  EXPECT_GE(hits / 1000.0, 0.99);
}

TEST(Synthetic, RejectsBadParameters) {
  EXPECT_THROW(GenerateSynthetic({.n = 0, .d = 4}), ConfigError);
  EXPECT_THROW(GenerateSynthetic({.n = 4, .d = 4, .walk_sigma = -1}), ConfigError);
}

TEST(L2Normalize, ThreeFourFive) {
  Matrix m(1, 2, {3.0f, 4.0f});
  const Matrix out = L2Normalize(m);
  EXPECT_NEAR(out(0, 0), 0.6f, 1e-7);
  EXPECT_NEAR(out(0, 1), 0.8f, 1e-7);
}

TEST(L2Normalize, UnitRowsUnchanged) {
  auto [ds, qs] = GenerateSynthetic({.n = 20, .d = 10, .seed = 2});
  const Matrix out = L2Normalize(ds.descriptors);
  for (std::size_t k = 0; k < out.values().size(); ++k) {
    EXPECT_NEAR(out.values()[k], ds.descriptors.values()[k], 1e-6);
  }
}

TEST(L2Normalize, ZeroRowNamed) {
  Matrix m(3, 2, {1, 0, 0, 0, 0, 1});
  try {
    L2Normalize(m);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

}  // namespace
}  // namespace btel
