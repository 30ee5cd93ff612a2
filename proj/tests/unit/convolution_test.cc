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
#include "patchdp/convolution.h"

#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace patchdp {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

TEST(ConvolutionTest, SmallDirect) {
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {3.0, 4.0, 5.0};
  EXPECT_THAT(ConvolveDirect(a, b), ElementsAre(3.0, 10.0, 13.0, 10.0));
}

TEST(ConvolutionTest, FftMatchesDirect) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (size_t n : {1u, 7u, 64u, 333u}) {
    std::vector<double> a(n), b(2 * n + 5);
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    const std::vector<double> direct = ConvolveDirect(a, b);
    const std::vector<double> fft = ConvolveFft(a, b);
    ASSERT_EQ(direct.size(), fft.size());
    EXPECT_THAT(fft, Pointwise(DoubleNear(1e-11), direct));
  }
}

TEST(ConvolutionTest, EmptyInput) {
  EXPECT_TRUE(ConvolveDirect({}, std::vector<double>{1.0}).empty());
  EXPECT_TRUE(ConvolveFft({}, std::vector<double>{1.0}).empty());
}

}  // namespace
}  // namespace patchdp
