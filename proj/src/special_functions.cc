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

#include "patchdp/special_functions.h"

#include <cmath>
#include <numbers>

namespace patchdp {

namespace {

// Scaling the argument by 1/sqrt(2) in double precision would cost up to
// 2 z^2 ulps of relative error deep in the tail, so the whole evaluation runs
// in long double.
double HalfErfc(long double z) {
  return static_cast<double>(0.5L * std::erfc(z));
}

constexpr long double kInvSqrt2 = 0.707106781186547524400844362104849039L;

}  // namespace

double NormalCdf(double x) {
  return HalfErfc(-static_cast<long double>(x) * kInvSqrt2);
}

double NormalSf(double x) {
  return HalfErfc(static_cast<long double>(x) * kInvSqrt2);
}

double NormalPdf(double x) {
  return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi /
         std::numbers::sqrt2;
}

}  // namespace patchdp
