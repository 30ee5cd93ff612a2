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
#include "patchdp/pld.h"

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "patchdp/divergence.h"

namespace patchdp {
namespace {

using ::testing::HasSubstr;

PrivacyCurve Subsampled(double gamma, double sensitivity, double sigma) {
  const SubsampledPair pair{GaussianPair{sensitivity, sigma}, gamma};
  auto curve = [pair](Direction dir) {
    return [pair, dir](double eps) {
      return HockeyStickMixture(pair, dir, Alpha::FromEpsilon(eps));
    };
  };
  auto excess = [pair](Direction dir) {
    return [pair, dir](double eps) {
      return HockeyStickMixtureExcess(pair, dir, Alpha::FromEpsilon(eps));
    };
  };
  PrivacyCurve c(curve(Direction::kForward), curve(Direction::kReverse),
                 "subsampled gaussian");
  c.WithExcess(excess(Direction::kForward), excess(Direction::kReverse));
  return c;
}

AccountingConfig Fixed(double spacing) {
  AccountingConfig config;
  config.grid_spacing = spacing;
  config.adaptive_grid = false;
  return config;
}

TEST(DiscretizeTest, ConservesMass) {
  for (Direction dir : {Direction::kForward, Direction::kReverse}) {
    absl::StatusOr<DiscretePld> pld =
        Discretize(Subsampled(0.01, 1.0, 1.0), dir, Fixed(1e-3));
    ASSERT_TRUE(pld.ok()) << pld.status();
    EXPECT_NEAR(pld->TotalMass(), 1.0, 1e-12);
    for (double m : pld->masses()) EXPECT_GE(m, 0.0);
  }
}

TEST(DiscretizeTest, PessimisticWithSmallGap) {
  const PrivacyCurve curve = Subsampled(0.05, 1.0, 1.0);
  for (Direction dir : {Direction::kForward, Direction::kReverse}) {
    absl::StatusOr<DiscretePld> pld = Discretize(curve, dir, Fixed(1e-3));
    ASSERT_TRUE(pld.ok());
    double worst_gap = 0.0;
    for (double eps = -1.0; eps <= 2.0; eps += 1.37e-4) {
      const double exact = curve.Delta(eps, dir);
      const double discrete = pld->DeltaAt(eps);
      ASSERT_GE(discrete, exact - 1e-14) << "eps = " << eps;
      worst_gap = std::max(worst_gap, discrete - exact);
    }
    EXPECT_LE(worst_gap, 1e-4);
  }
}

TEST(DiscretizeTest, ExactOnGridPoints) {
  const PrivacyCurve curve = Subsampled(0.2, 2.0, 1.0);
  absl::StatusOr<DiscretePld> pld =
      Discretize(curve, Direction::kForward, Fixed(1e-2));
  ASSERT_TRUE(pld.ok());
  for (int k = 1; k < 100; k += 7) {
    const double eps = k * 1e-2;
    EXPECT_NEAR(pld->DeltaAt(eps), curve.Delta(eps, Direction::kForward), 1e-13);
  }
}

TEST(DiscretizeTest, RejectsNonMonotoneCurve) {
  PrivacyCurve bad = PrivacyCurve::Symmetric(
      [](double eps) {
        const double base = HockeyStickGaussian(GaussianPair{1.0, 1.0},
                                                Alpha::FromEpsilon(eps));
        return eps > 0.5 && eps < 0.6 ? base + 0.05 : base;
      },
      "bad");
  absl::StatusOr<DiscretePld> pld = Discretize(bad, Direction::kForward, Fixed(1e-2));
  EXPECT_EQ(pld.status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST(AccountingConfigTest, Validates) {
  AccountingConfig config;
  EXPECT_TRUE(config.Validate().ok());
  config.grid_spacing = 0.0;
  EXPECT_FALSE(config.Validate().ok());
  config = AccountingConfig{};
  config.tail_mass_truncation = -1.0;
  EXPECT_FALSE(config.Validate().ok());
  config = AccountingConfig{};
  config.steps = 0;
  EXPECT_FALSE(config.Validate().ok());
}

TEST(DiscretePldTest, EpsilonAtInvertsDeltaAt) {
  absl::StatusOr<DiscretePld> pld =
      Discretize(Subsampled(0.1, 1.0, 1.0), Direction::kForward, Fixed(1e-3));
  ASSERT_TRUE(pld.ok());
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    absl::StatusOr<double> eps = pld->EpsilonAt(delta);
    ASSERT_TRUE(eps.ok());
    EXPECT_NEAR(pld->DeltaAt(*eps), delta, 1e-12);
    absl::StatusOr<double> snapped = pld->EpsilonAt(delta, true);
    ASSERT_TRUE(snapped.ok());
    EXPECT_GE(*snapped, *eps);
    EXPECT_LT(*snapped - *eps, 1e-3 + 1e-12);
    EXPECT_LE(pld->DeltaAt(*snapped), delta);
  }
  absl::StatusOr<double> anything = pld->EpsilonAt(1.0);
  ASSERT_TRUE(anything.ok());
  EXPECT_LE(*anything, pld->Loss(0));
}

TEST(DiscretePldTest, UnreachableDeltaFails) {
  const DiscretePld pld(0.1, 0, {0.5}, 0.5);
  EXPECT_EQ(pld.EpsilonAt(0.25).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(ComposeTest, IdentityIsNeutral) {
  absl::StatusOr<DiscretePld> pld =
      Discretize(Subsampled(0.1, 1.0, 1.0), Direction::kForward, Fixed(1e-3));
  ASSERT_TRUE(pld.ok());
  absl::StatusOr<DiscretePld> same =
      Convolve(*pld, DiscretePld::Identity(1e-3), Fixed(1e-3));
  ASSERT_TRUE(same.ok());
  for (double eps : {0.0, 0.1, 0.5}) {
    EXPECT_NEAR(same->DeltaAt(eps), pld->DeltaAt(eps), 1e-15);
  }
}

TEST(ComposeTest, SquaringMatchesSequential) {
  const AccountingConfig config = Fixed(1e-3);
  absl::StatusOr<DiscretePld> pld =
      Discretize(Subsampled(0.05, 1.0, 0.8), Direction::kForward, config);
  ASSERT_TRUE(pld.ok());
  for (int64_t t : {2, 3, 4, 5, 8}) {
    absl::StatusOr<DiscretePld> fast = Compose(*pld, t, config);
    absl::StatusOr<DiscretePld> slow = ComposeSequential(*pld, t, config);
    ASSERT_TRUE(fast.ok() && slow.ok());
    for (double eps = 0.0; eps <= 3.0; eps += 0.05) {
      EXPECT_NEAR(fast->DeltaAt(eps), slow->DeltaAt(eps), 1e-12) << t;
    }
  }
}

TEST(ComposeTest, Associative) {
  const AccountingConfig config = Fixed(1e-3);
  absl::StatusOr<DiscretePld> pld =
      Discretize(Subsampled(0.02, 1.0, 1.0), Direction::kForward, config);
  ASSERT_TRUE(pld.ok());
  absl::StatusOr<DiscretePld> a = Compose(*pld, 6, config);
  absl::StatusOr<DiscretePld> b = Compose(*pld, 10, config);
  absl::StatusOr<DiscretePld> ab = Convolve(*a, *b, config);
  absl::StatusOr<DiscretePld> whole = Compose(*pld, 16, config);
  ASSERT_TRUE(ab.ok() && whole.ok());
  for (double delta : {1e-3, 1e-5}) {
    EXPECT_NEAR(*ab->EpsilonAt(delta), *whole->EpsilonAt(delta), 2e-3);
  }
}

TEST(ComposeTest, InfinityMassComposes) {
  const DiscretePld pld(0.1, -1, {0.2, 0.5, 0.2}, 0.1);
  absl::StatusOr<DiscretePld> composed = Compose(pld, 5, Fixed(0.1));
  ASSERT_TRUE(composed.ok());
  EXPECT_NEAR(composed->infinity_mass(), 1.0 - std::pow(0.9, 5), 1e-12);
  EXPECT_NEAR(composed->TotalMass(), 1.0, 1e-12);
}

TEST(ComposeTest, LengthGuard) {
  AccountingConfig config = Fixed(1e-4);
  config.max_grid_length = 1000;
  absl::StatusOr<DiscretePld> pld =
      Discretize(Subsampled(0.5, 1.0, 1.0), Direction::kForward, Fixed(1e-4));
  ASSERT_TRUE(pld.ok());
  absl::StatusOr<DiscretePld> composed = Compose(*pld, 64, config);
  EXPECT_EQ(composed.status().code(), absl::StatusCode::kResourceExhausted);
}

TEST(CoarsenTest, ConservesMassAndDominates) {
  absl::StatusOr<DiscretePld> fine =
      Discretize(Subsampled(0.05, 1.0, 1.0), Direction::kForward, Fixed(1e-4));
  ASSERT_TRUE(fine.ok());
  absl::StatusOr<DiscretePld> coarse = Coarsen(*fine, 8);
  ASSERT_TRUE(coarse.ok());
  EXPECT_DOUBLE_EQ(coarse->grid_spacing(), 8e-4);
  EXPECT_NEAR(coarse->TotalMass(), fine->TotalMass(), 1e-14);
  for (double eps = 0.0; eps <= 1.0; eps += 3.1e-4) {
    EXPECT_GE(coarse->DeltaAt(eps), fine->DeltaAt(eps) - 1e-15);
  }
  EXPECT_FALSE(Coarsen(*fine, 0).ok());
}

TEST(ComposeCurveTest, AdaptiveAgreesWithFineFixedGrid) {
  const PrivacyCurve curve = Subsampled(0.01, 1.0, 1.0);
  AccountingConfig adaptive;
  absl::StatusOr<ComposedProfile> a = ComposeCurve(curve, 500, adaptive);
  absl::StatusOr<ComposedProfile> f = ComposeCurve(curve, 500, Fixed(1e-4));
  ASSERT_TRUE(a.ok() && f.ok());
  absl::StatusOr<double> ea = a->EpsilonAt(1e-5);
  absl::StatusOr<double> ef = f->EpsilonAt(1e-5);
  ASSERT_TRUE(ea.ok() && ef.ok());
  EXPECT_NEAR(*ea, *ef, 0.005 * *ef);
  EXPECT_TRUE(a->forward().has_value());
  EXPECT_TRUE(a->reverse().has_value());
}

TEST(ComposeCurveTest, ReportsWorstDirection) {
  const PrivacyCurve curve = Subsampled(0.3, 1.0, 1.0);
  AccountingConfig config;
  absl::StatusOr<ComposedProfile> both = ComposeCurve(curve, 20, config);
  config.direction = DirectionMode::kForward;
  absl::StatusOr<ComposedProfile> fwd = ComposeCurve(curve, 20, config);
  config.direction = DirectionMode::kReverse;
  absl::StatusOr<ComposedProfile> rev = ComposeCurve(curve, 20, config);
  ASSERT_TRUE(both.ok() && fwd.ok() && rev.ok());
  for (double eps : {0.0, 0.5, 1.0, 2.0}) {
    EXPECT_DOUBLE_EQ(both->DeltaAt(eps),
                     std::max(fwd->DeltaAt(eps), rev->DeltaAt(eps)));
  }
}

}  // namespace
}  // namespace patchdp
