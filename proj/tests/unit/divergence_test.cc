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
#include "patchdp/divergence.h"

#include <cmath>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace patchdp {
namespace {

// Reference values: quadrature of dP - e^eps dQ at 40 significant digits,
// split at the density crossings.
struct Reference {
  double gamma;
  double sensitivity;
  double sigma;
  double epsilon;
  double value;
};

TEST(GaussianTest, MatchesReference) {
  constexpr Reference kCases[] = {
      {1.0, 1.0, 1.0, 0.0, 0.38292492254802620728},
      {1.0, 1.0, 1.0, 1.0, 0.12693673750664394580},
      {1.0, 2.0, 1.0, 0.5, 0.59918561853393326306},
  };
  for (const Reference& r : kCases) {
    EXPECT_NEAR(HockeyStickGaussian(GaussianPair{r.sensitivity, r.sigma},
                                    Alpha::FromEpsilon(r.epsilon)),
                r.value, 1e-15);
  }
}

TEST(GaussianTest, TotalVariationAtAlphaOne) {
  // H_1 of N(1, 1) and N(0, 1) is 2 Phi(1/2) - 1.
  EXPECT_NEAR(HockeyStickGaussian(GaussianPair{1.0, 1.0}, Alpha::FromValue(1.0)),
              0.38292492254802620728, 1e-16);
}

TEST(SubsampledTest, ForwardMatchesReference) {
  constexpr Reference kCases[] = {
      {0.1, 1.0, 1.0, 0.5, 0.0020325369203403581476},
      {0.025, 2.0, 1.0, 1.0, 0.0017075791682443165428},
      {0.3, 1.0, 0.5, 2.0, 0.051320182463279574314},
  };
  for (const Reference& r : kCases) {
    const SubsampledPair pair{GaussianPair{r.sensitivity, r.sigma}, r.gamma};
    EXPECT_NEAR(HockeyStickSubsampled(pair, Alpha::FromEpsilon(r.epsilon)),
                r.value, 1e-15 + 1e-13 * r.value);
  }
}

TEST(SubsampledTest, ReverseMatchesReference) {
  constexpr Reference kCases[] = {
      {0.1, 1.0, 1.0, -0.05, 0.073639196970066009438},
      {0.025, 2.0, 1.0, -0.01, 0.025471361404600380719},
      {0.3, 1.0, 0.5, -0.2, 0.32617646023703271319},
  };
  for (const Reference& r : kCases) {
    const SubsampledPair pair{GaussianPair{r.sensitivity, r.sigma}, r.gamma};
    EXPECT_NEAR(HockeyStickSubsampled(pair, Alpha::FromEpsilon(r.epsilon)),
                r.value, 1e-14);
  }
}

TEST(SubsampledTest, FullRateIsTheGaussianCurve) {
  const GaussianPair base{1.0, 0.8};
  for (double eps = -3.0; eps <= 6.0; eps += 0.25) {
    const double subsampled =
        HockeyStickSubsampled(SubsampledPair{base, 1.0}, Alpha::FromEpsilon(eps));
    // Below zero the reverse pair of the full-rate mechanism is the swapped
    // Gaussian pair, which shares its curve by symmetry.
    EXPECT_NEAR(subsampled, HockeyStickGaussian(base, Alpha::FromEpsilon(eps)),
                1e-15)
        << eps;
  }
}

TEST(SubsampledTest, ZeroRateIsTrivial) {
  const SubsampledPair pair{GaussianPair{1.0, 1.0}, 0.0};
  EXPECT_EQ(HockeyStickSubsampled(pair, Alpha::FromEpsilon(0.3)), 0.0);
  EXPECT_NEAR(HockeyStickSubsampled(pair, Alpha::FromEpsilon(-0.3)),
              -std::expm1(-0.3), 1e-16);
}

TEST(SubsampledTest, ContinuousAtAlphaOne) {
  const SubsampledPair pair{GaussianPair{2.0, 1.0}, 0.03};
  const double at_zero = HockeyStickSubsampled(pair, Alpha::FromEpsilon(0.0));
  EXPECT_NEAR(HockeyStickSubsampled(pair, Alpha::FromEpsilon(1e-9)), at_zero,
              1e-9);
  EXPECT_NEAR(HockeyStickSubsampled(pair, Alpha::FromEpsilon(-1e-9)), at_zero,
              1e-9);
  EXPECT_NEAR(HockeyStickMixture(pair, Direction::kForward, Alpha::FromValue(1)),
              HockeyStickMixture(pair, Direction::kReverse, Alpha::FromValue(1)),
              1e-16);
}

TEST(SubsampledTest, DecreasingInEpsilonAndIncreasingInRate) {
  const GaussianPair base{1.0, 1.0};
  double previous = 1.0;
  for (double eps = -4.0; eps <= 8.0; eps += 0.1) {
    const double d =
        HockeyStickSubsampled(SubsampledPair{base, 0.05}, Alpha::FromEpsilon(eps));
    EXPECT_LE(d, previous);
    EXPECT_LE(d, HockeyStickSubsampled(SubsampledPair{base, 0.06},
                                       Alpha::FromEpsilon(eps)));
    previous = d;
  }
}

TEST(SubsampledTest, ExcessIsDeltaMinusTrivialPart) {
  const SubsampledPair pair{GaussianPair{1.0, 2.0}, 1e-3};
  for (Direction dir : {Direction::kForward, Direction::kReverse}) {
    for (double eps : {-2.0, -0.5, -1e-3, 0.0, 1e-3, 0.4}) {
      const Alpha a = Alpha::FromEpsilon(eps);
      const double excess = HockeyStickMixtureExcess(pair, dir, a);
      EXPECT_GE(excess, 0.0);
      EXPECT_NEAR(excess, HockeyStickMixture(pair, dir, a) + std::expm1(eps),
                  1e-15);
    }
  }
  // Deep in the eps < 0 region the excess stays resolvable while the
  // subtraction would have cancelled to zero.
  const double tiny = HockeyStickMixtureExcess(pair, Direction::kReverse,
                                               Alpha::FromEpsilon(-30.0));
  EXPECT_GE(tiny, 0.0);
  EXPECT_LT(tiny, 1e-12);
}

TEST(SubsampledTest, AgreesWithQuadrature) {
  const SubsampledPair pair{GaussianPair{1.0, 1.0}, 0.5};
  for (Direction dir : {Direction::kForward, Direction::kReverse}) {
    const MixturePair m = MixturesFor(pair, dir);
    for (double alpha : {0.5, 1.0, 2.0}) {
      absl::StatusOr<double> numeric =
          HockeyStickNumeric(m.numerator, m.denominator,
                             Alpha::FromValue(alpha), 1e-12);
      ASSERT_TRUE(numeric.ok()) << numeric.status();
      EXPECT_NEAR(*numeric,
                  HockeyStickMixture(pair, dir, Alpha::FromValue(alpha)),
                  1e-10);
    }
  }
}

TEST(SubsampledTest, ValidatesInputs) {
  EXPECT_FALSE((SubsampledPair{GaussianPair{1.0, 1.0}, 1.5}).Validate().ok());
  EXPECT_FALSE((SubsampledPair{GaussianPair{1.0, 0.0}, 0.5}).Validate().ok());
  EXPECT_FALSE((SubsampledPair{GaussianPair{-1.0, 1.0}, 0.5}).Validate().ok());
  EXPECT_TRUE((SubsampledPair{GaussianPair{1.0, 1.0}, 0.0}).Validate().ok());
}

TEST(NaiveAmplificationTest, MatchesReference) {
  EXPECT_NEAR(NaiveAmplifiedEpsilon(0.01, 1.0), 0.017036863236176549786, 1e-17);
  EXPECT_EQ(NaiveAmplifiedEpsilon(1.0, 2.5), 2.5);
  EXPECT_EQ(NaiveAmplifiedEpsilon(0.0, 2.5), 0.0);
}

TEST(MixtureTest, DensityIsWeightedSum) {
  const GaussianMixture1D m{{0.25, 0.75}, {0.0, 1.0}, 1.0};
  const double expected =
      0.25 * std::exp(-0.5 * 0.09) / std::sqrt(2 * M_PI) +
      0.75 * std::exp(-0.5 * 0.49) / std::sqrt(2 * M_PI);
  EXPECT_NEAR(m.Density(0.3), expected, 1e-16);
}

}  // namespace
}  // namespace patchdp
