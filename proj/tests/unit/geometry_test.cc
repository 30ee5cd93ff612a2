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
#include "patchdp/geometry.h"

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "patchdp/oracle.h"

namespace patchdp {
namespace {

using ::testing::HasSubstr;

CropConfig Square(int64_t image, int64_t crop, int64_t pad = 0) {
  return CropConfig{image, image, pad, pad, crop, crop};
}

TEST(OriginSpaceTest, CountsOriginsInPaddedImage) {
  absl::StatusOr<OriginSpace> space =
      ComputeOriginSpace(CropConfig{1000, 500, 4, 2, 100, 50});
  ASSERT_TRUE(space.ok());
  EXPECT_EQ(space->width, 909);
  EXPECT_EQ(space->height, 455);
}

TEST(OriginSpaceTest, RejectsInvalidConfigs) {
  EXPECT_THAT(CropConfig({10, 10, 0, 0, 11, 5}).Validate().message(),
              HasSubstr("crop width 11 exceeds padded image width 10"));
  EXPECT_THAT(CropConfig({10, 10, 0, 0, 5, 11}).Validate().message(),
              HasSubstr("crop height"));
  EXPECT_THAT(CropConfig({10, 10, -1, 0, 5, 5}).Validate().message(),
              HasSubstr("padding must be non-negative"));
  EXPECT_THAT(CropConfig({0, 10, 0, 0, 1, 1}).Validate().message(),
              HasSubstr("image size"));
  EXPECT_THAT(CropConfig({10, 10, 0, 0, 0, 1}).Validate().message(),
              HasSubstr("crop size"));
  EXPECT_TRUE(CropConfig({10, 10, 1, 1, 12, 12}).Validate().ok());
}

TEST(InclusionTest, CenteredTenPixelPatch) {
  absl::StatusOr<WorstCaseInclusion> w =
      ComputeWorstCaseInclusion(Square(1000, 100), RectShape{10, 10});
  ASSERT_TRUE(w.ok());
  EXPECT_EQ(w->probability.favorable, 109 * 109);
  EXPECT_EQ(w->probability.total, 901 * 901);
  EXPECT_EQ(w->placement, (Placement{495, 495}));
  EXPECT_DOUBLE_EQ(w->probability.value(), 0.014635360143680532544);
}

TEST(InclusionTest, FullImageCropAlwaysIncludesPatch) {
  absl::StatusOr<WorstCaseInclusion> w =
      ComputeWorstCaseInclusion(Square(64, 64), RectShape{3, 5});
  ASSERT_TRUE(w.ok());
  EXPECT_EQ(w->probability, (InclusionProbability{1, 1}));
  EXPECT_TRUE(w->probability.is_one());
}

TEST(InclusionTest, CornerPatchIsLessExposed) {
  const CropConfig config = Square(100, 20);
  absl::StatusOr<InclusionProbability> corner =
      InclusionProbabilityRect(config, RectShape{5, 5}, Placement{0, 0});
  ASSERT_TRUE(corner.ok());
  EXPECT_EQ(corner->favorable, 5 * 5);
  EXPECT_EQ(corner->total, 81 * 81);
}

TEST(InclusionTest, PaddingEnlargesOriginSpace) {
  absl::StatusOr<WorstCaseInclusion> a =
      ComputeWorstCaseInclusion(Square(100, 30, 0), RectShape{4, 4});
  absl::StatusOr<WorstCaseInclusion> b =
      ComputeWorstCaseInclusion(Square(100, 30, 8), RectShape{4, 4});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->probability.favorable, b->probability.favorable);
  EXPECT_EQ(b->probability.total, 87 * 87);
  EXPECT_LT(b->probability.value(), a->probability.value());
}

TEST(InclusionTest, SaturationCutoffs) {
  int64_t first_crop = -1;
  for (int64_t c = 50; c <= 700 && first_crop < 0; ++c) {
    absl::StatusOr<WorstCaseInclusion> w =
        ComputeWorstCaseInclusion(Square(1000, c), RectShape{10, 10});
    ASSERT_TRUE(w.ok());
    if (w->probability.is_one()) first_crop = c;
  }
  EXPECT_EQ(first_crop, 496);

  int64_t first_patch = -1;
  for (int64_t p = 1; p <= 120 && first_patch < 0; ++p) {
    absl::StatusOr<WorstCaseInclusion> w =
        ComputeWorstCaseInclusion(Square(1000, 450), RectShape{p, p});
    ASSERT_TRUE(w.ok());
    if (w->probability.is_one()) first_patch = p;
  }
  EXPECT_EQ(first_patch, 102);
}

TEST(InclusionTest, ClosedFormMatchesEnumeration) {
  std::mt19937_64 rng(7);
  auto uniform = [&](int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
  };
  for (int trial = 0; trial < 200; ++trial) {
    CropConfig c;
    c.image_width = uniform(1, 40);
    c.image_height = uniform(1, 40);
    c.pad_x = uniform(0, 6);
    c.pad_y = uniform(0, 6);
    c.crop_width = uniform(1, c.padded_width());
    c.crop_height = uniform(1, c.padded_height());
    const RectShape r{uniform(1, c.image_width), uniform(1, c.image_height)};
    const Placement at{uniform(0, c.image_width - r.width),
                       uniform(0, c.image_height - r.height)};
    absl::StatusOr<InclusionProbability> closed =
        InclusionProbabilityRect(c, r, at);
    absl::StatusOr<InclusionProbability> counted =
        EnumerateInclusion(c, PatchSpec{r, at});
    ASSERT_TRUE(closed.ok() && counted.ok());
    ASSERT_EQ(*closed, *counted) << "trial " << trial;
  }
}

TEST(InclusionTest, CenterIsNeverBeaten) {
  std::mt19937_64 rng(11);
  auto uniform = [&](int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const CropConfig c{uniform(2, 30), uniform(2, 30), uniform(0, 3),
                       uniform(0, 3), 1, 1};
    CropConfig config = c;
    config.crop_width = uniform(1, c.padded_width());
    config.crop_height = uniform(1, c.padded_height());
    const RectShape r{uniform(1, c.image_width), uniform(1, c.image_height)};
    absl::StatusOr<WorstCaseInclusion> center =
        ComputeWorstCaseInclusion(config, r);
    ASSERT_TRUE(center.ok());
    for (int64_t y = 0; y + r.height <= c.image_height; ++y) {
      for (int64_t x = 0; x + r.width <= c.image_width; ++x) {
        absl::StatusOr<InclusionProbability> p =
            InclusionProbabilityRect(config, r, Placement{x, y});
        ASSERT_TRUE(p.ok());
        ASSERT_LE(p->favorable, center->probability.favorable);
      }
    }
  }
}

TEST(InclusionTest, RejectsPatchOutsideImage) {
  EXPECT_THAT(InclusionProbabilityRect(Square(10, 3), RectShape{4, 4},
                                       Placement{7, 0})
                  .status()
                  .message(),
              HasSubstr("leaves the original"));
  EXPECT_THAT(
      ComputeWorstCaseInclusion(Square(10, 3), RectShape{11, 1}).status().message(),
      HasSubstr("does not fit"));
}

TEST(MaskTest, FromRowsFlipsToBottomLeftOrigin) {
  absl::StatusOr<Mask> mask = Mask::FromRows({"100", "0 1 1"});
  ASSERT_TRUE(mask.ok());
  EXPECT_EQ(mask->width(), 3);
  EXPECT_EQ(mask->height(), 2);
  EXPECT_TRUE(mask->at(0, 1));
  EXPECT_TRUE(mask->at(1, 0));
  EXPECT_FALSE(mask->at(0, 0));
  EXPECT_EQ(mask->count(), 3);
}

TEST(MaskTest, RejectsMalformedRows) {
  EXPECT_THAT(Mask::FromRows({"10", "1"}).status().message(),
              HasSubstr("columns"));
  EXPECT_THAT(Mask::FromRows({"1x"}).status().message(),
              HasSubstr("unexpected character"));
  EXPECT_THAT(Mask::FromRows({"00", "00"}).status().message(),
              HasSubstr("no set pixels"));
}

TEST(MaskTest, ReadsPortableBitmap) {
  const std::string path = ::testing::TempDir() + "/mask_test.pbm";
  {
    std::ofstream out(path);
    out << "P1\n# comment\n3 2\n1 0 0\n0 1 1\n";
  }
  absl::StatusOr<Mask> mask = Mask::FromFile(path);
  ASSERT_TRUE(mask.ok()) << mask.status();
  EXPECT_EQ(mask->count(), 3);
  EXPECT_TRUE(mask->at(0, 1));
  std::remove(path.c_str());
  EXPECT_EQ(Mask::FromFile(path).status().code(), absl::StatusCode::kNotFound);
}

TEST(MaskTest, SolidMaskMatchesRectangle) {
  const CropConfig config = CropConfig{60, 40, 2, 1, 17, 9};
  const Placement at{20, 13};
  absl::StatusOr<InclusionProbability> rect =
      InclusionProbabilityRect(config, RectShape{7, 5}, at);
  absl::StatusOr<InclusionProbability> mask =
      InclusionProbabilityMask(config, Mask::SolidRect(7, 5), at);
  ASSERT_TRUE(rect.ok() && mask.ok());
  EXPECT_EQ(*rect, *mask);
}

TEST(MaskTest, SubsetIsNoMoreExposed) {
  const CropConfig config = Square(200, 40);
  const Mask disk = Mask::Disk(6);
  const Mask box = Mask::SolidRect(disk.width(), disk.height());
  ASSERT_TRUE(disk.IsSubsetOf(box));
  absl::StatusOr<WorstCaseInclusion> d = ComputeWorstCaseInclusion(config, disk);
  absl::StatusOr<WorstCaseInclusion> b = ComputeWorstCaseInclusion(config, box);
  ASSERT_TRUE(d.ok() && b.ok());
  EXPECT_LT(d->probability.favorable, b->probability.favorable);
  EXPECT_GT(d->probability.favorable, 0);
}

TEST(MaskTest, WorstCaseSearchMatchesEnumeration) {
  const CropConfig config = CropConfig{24, 18, 1, 2, 7, 5};
  absl::StatusOr<Mask> mask = Mask::FromRows({"1001", "0000", "0110"});
  ASSERT_TRUE(mask.ok());
  absl::StatusOr<WorstCaseInclusion> best =
      ComputeWorstCaseInclusion(config, *mask);
  ASSERT_TRUE(best.ok());
  int64_t max_count = -1;
  for (int64_t y = 0; y + mask->height() <= config.image_height; ++y) {
    for (int64_t x = 0; x + mask->width() <= config.image_width; ++x) {
      absl::StatusOr<InclusionProbability> p =
          EnumerateInclusion(config, PatchSpec{*mask, Placement{x, y}});
      ASSERT_TRUE(p.ok());
      max_count = std::max(max_count, p->favorable);
    }
  }
  EXPECT_EQ(best->probability.favorable, max_count);
  absl::StatusOr<InclusionProbability> at_best =
      EnumerateInclusion(config, PatchSpec{*mask, best->placement});
  ASSERT_TRUE(at_best.ok());
  EXPECT_EQ(at_best->favorable, max_count);
}

TEST(EffectiveRateTest, MultipliesRates) {
  absl::StatusOr<double> rate = EffectiveRate(100.0 / 3000.0, 11881.0 / 811801.0);
  ASSERT_TRUE(rate.ok());
  EXPECT_DOUBLE_EQ(*rate, 0.00048784533812268441814);
  EXPECT_FALSE(EffectiveRate(1.5, 0.5).ok());
  EXPECT_FALSE(EffectiveRate(0.5, -0.1).ok());
}

}  // namespace
}  // namespace patchdp
