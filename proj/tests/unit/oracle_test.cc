// Copyright 2026 The PatchDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "patchdp/oracle.h"

#include <cmath>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace patchdp {
namespace {

using ::testing::HasSubstr;

TEST(CounterRngTest, ReproducibleStreams) {
  CounterRng a(42, 3);
  CounterRng b(42, 3);
  CounterRng c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs |= x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(CounterRngTest, MomentsLookRight) {
  CounterRng rng(1, 0);
  double sum_u = 0.0;
  double sum_z = 0.0;
  double sum_z2 = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const double u = rng.Uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum_u += u;
    const double z = rng.Normal();
    sum_z += z;
    sum_z2 += z * z;
  }
  EXPECT_NEAR(sum_u / kN, 0.5, 0.005);
  EXPECT_NEAR(sum_z / kN, 0.0, 0.01);
  EXPECT_NEAR(sum_z2 / kN, 1.0, 0.02);
}

TEST(EnumerateTest, MatchesKnownCount) {
  const CropConfig config{40, 30, 2, 1, 10, 8};
  absl::StatusOr<InclusionProbability> p =
      EnumerateInclusion(config, PatchSpec{RectShape{3, 2}, Placement{5, 7}});
  ASSERT_TRUE(p.ok());
  // x: origins 0..34, hits u in [5+2-9, 5+2+2] = [-2, 9] -> 10.
  // y: origins 0..24, hits v in [7+1-7, 7+1+1] = [1, 9] -> 9.
  EXPECT_EQ(p->favorable, 10 * 9);
  EXPECT_EQ(p->total, 35 * 25);
}

TEST(EnumerateTest, MaskNeedsPlacement) {
  EXPECT_THAT(EnumerateInclusion(CropConfig{10, 10, 0, 0, 3, 3},
                                 PatchSpec{Mask::Disk(1), std::nullopt})
                  .status()
                  .message(),
              HasSubstr("placement"));
}

TEST(McHockeyStickTest, AgreesWithClosedForm) {
  const SubsampledPair pair{GaussianPair{1.0, 1.0}, 0.03};
  for (double eps : {1.0, 0.1, -0.05}) {
    absl::StatusOr<McEstimate> mc =
        McHockeyStick(pair, Alpha::FromEpsilon(eps), 400000, 9);
    ASSERT_TRUE(mc.ok());
    const double exact = HockeyStickSubsampled(pair, Alpha::FromEpsilon(eps));
    EXPECT_NEAR(mc->estimate, exact, 5 * mc->std_error + 1e-12) << eps;
    EXPECT_EQ(mc->samples, 400000);
  }
}

TEST(McHockeyStickTest, SeedDeterminesResult) {
  const SubsampledPair pair{GaussianPair{2.0, 1.0}, 0.1};
  absl::StatusOr<McEstimate> a = McHockeyStick(pair, Alpha::FromEpsilon(0.5), 200000, 5);
  absl::StatusOr<McEstimate> b = McHockeyStick(pair, Alpha::FromEpsilon(0.5), 200000, 5);
  absl::StatusOr<McEstimate> c = McHockeyStick(pair, Alpha::FromEpsilon(0.5), 200000, 6);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_EQ(a->estimate, b->estimate);
  EXPECT_NE(a->estimate, c->estimate);
}

TEST(McHockeyStickTest, NeedsEnoughSamples) {
  const SubsampledPair pair{GaussianPair{1.0, 1.0}, 0.5};
  EXPECT_EQ(McHockeyStick(pair, Alpha::FromEpsilon(0.0), 10, 1).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(WorstCaseMechanismTest, MatchesSubsampledBound) {
  // 7x7 image, 2x2 crop and patch: 3 of 6 origins per axis hit the patch.
  const CropConfig config{7, 7, 0, 0, 2, 2};
  const PatchSpec patch{RectShape{2, 2}, std::nullopt};
  const SubsampledPair pair{GaussianPair{2.0, 1.0}, 0.1 * 0.25};
  for (double eps : {0.0, 1.0}) {
    absl::StatusOr<McEstimate> mc = WorstCaseMechanismDivergence(
        0.1, config, patch, 1.0, eps, 400000, 17, 1.0);
    ASSERT_TRUE(mc.ok()) << mc.status();
    EXPECT_NEAR(mc->estimate,
                HockeyStickSubsampled(pair, Alpha::FromEpsilon(eps)),
                5 * mc->std_error);
  }
}

TEST(WorstCaseMechanismTest, RejectsBadInputs) {
  const CropConfig config{7, 7, 0, 0, 2, 2};
  const PatchSpec patch{RectShape{2, 2}, std::nullopt};
  EXPECT_FALSE(
      WorstCaseMechanismDivergence(1.5, config, patch, 1.0, 0.0, 5000, 1).ok());
  EXPECT_FALSE(
      WorstCaseMechanismDivergence(0.5, config, patch, 0.0, 0.0, 5000, 1).ok());
}

}  // namespace
}  // namespace patchdp
