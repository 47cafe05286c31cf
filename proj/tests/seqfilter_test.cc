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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "btel/error.h"

namespace btel {
namespace {

std::vector<std::int64_t> Corrupted(std::uint64_t seed, double fraction) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> anywhere(0, 99);
  std::vector<std::int64_t> raws(100);
  for (std::int64_t i = 0; i < 100; ++i) raws[i] = u(rng) < fraction ? anywhere(rng) : i;
  return raws;
}

double Mae(const std::vector<std::int64_t>& v) {
  double e = 0;
  for (std::size_t i = 0; i < v.size(); ++i) e += std::abs(v[i] - std::int64_t(i));
  return e / v.size();
}

TEST(SequenceFilter, CorrectsJumpFromWarmWindow) {
  SequenceFilter f(2);
  for (std::int64_t v : {10, 11, 12, 13}) EXPECT_EQ(f.Filter(v), v);
  ASSERT_TRUE(f.warm());
  EXPECT_EQ(f.Median(), 11);
  EXPECT_EQ(f.Filter(20), 14);
}

TEST(SequenceFilter, SmallStepPassesThrough) {
  SequenceFilter f(2);
  for (std::int64_t v : {10, 11, 12, 13}) f.Filter(v);
  EXPECT_EQ(f.Filter(14), 14);  // |14 - 11| = 3 is within a + 1
}

TEST(SequenceFilter, ZeroWindowIsPassthrough) {
  SequenceFilter f(0);
  for (std::int64_t v : {5, 500, 3, 77}) EXPECT_EQ(f.Filter(v), v);
  EXPECT_TRUE(f.history().empty());
}

TEST(SequenceFilter, HistoryHoldsOutputsAndIsBounded) {
  SequenceFilter f(3);
  for (int i = 0; i < 1000; ++i) {
    f.Filter(i % 7 == 0 ? 900 : i);
    ASSERT_LE(f.history().size(), 6u);
  }
  EXPECT_EQ(f.capacity(), 6u);
  SequenceFilter g(2);
  for (std::int64_t v : {10, 11, 12, 13, 20}) g.Filter(v);
  EXPECT_EQ(g.history().back(), 14);
}

TEST(SequenceFilter, RawHistoryKeepsRawPredictions) {
  SequenceFilter f(2, FilterHistory::kRaw);
  for (std::int64_t v : {10, 11, 12, 13}) f.Filter(v);
  EXPECT_EQ(f.Filter(20), 14);
  EXPECT_EQ(f.history().back(), 20);
  EXPECT_EQ(f.history().size(), 4u);
}

// Raw predictions that lag by up to 2a + 2 frames are accepted while those
// ahead are clamped, so stored outputs drift behind; raw history does not.
TEST(SequenceFilter, OutputHistoryDriftsOnJitteredTrack) {
  std::vector<std::int64_t> raws;
  std::mt19937_64 rng(1);
  for (std::int64_t i = 0; i < 400; ++i) raws.push_back(i + std::int64_t(rng() % 7) - 3);
  EXPECT_LE(Mae(FilterSequence(5, raws, FilterHistory::kRaw)), Mae(raws));
  EXPECT_GT(Mae(FilterSequence(5, raws, FilterHistory::kOutputs)), Mae(raws));
}

TEST(SequenceFilter, NegativeWindowRejected) {
  EXPECT_THROW(SequenceFilter(-1), ConfigError);
}

TEST(FilterSequence, MatchesSequentialFolding) {
  const auto raws = Corrupted(3, 0.2);
  SequenceFilter f(5);
  std::vector<std::int64_t> expected;
  for (std::int64_t r : raws) expected.push_back(f.Filter(r));
  EXPECT_EQ(FilterSequence(5, raws), expected);
  EXPECT_EQ(FilterSequence(5, raws).size(), raws.size());
}

// A window of four frames can be filled by outliers during warm-up; the
// stored outputs then never return to the true trajectory.
TEST(FilterSequence, PoisonedWarmupLocksSmallWindow) {
  const std::vector<std::int64_t> raws = {99, 59, 2, 63, 4, 5, 6, 7, 8, 9};
  const auto out = FilterSequence(2, raws);
  EXPECT_EQ(out[4], 62);  // median 59 + 3
  EXPECT_GT(Mae(out), Mae(raws));
}

TEST(FilterSequence, ReducesErrorOnCorruptedSequences) {
  for (double fraction : {0.1, 0.2, 0.3}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto raws = Corrupted(seed, fraction);
      for (int a : {5, 20}) {
        EXPECT_LE(Mae(FilterSequence(a, raws)), Mae(raws))
            << "fraction " << fraction << " seed " << seed << " a " << a;
        EXPECT_LE(Mae(FilterSequence(a, raws, FilterHistory::kRaw)), Mae(raws))
            << "raw history, fraction " << fraction << " seed " << seed << " a " << a;
      }
    }
  }
}

}  // namespace
}  // namespace btel
