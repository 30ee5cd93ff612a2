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

// Brute-force validators. Nothing here calls the closed forms they check.

#ifndef PATCHDP_ORACLE_H_
#define PATCHDP_ORACLE_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "patchdp/divergence.h"
#include "patchdp/geometry.h"

namespace patchdp {

inline constexpr int64_t kMaxEnumeratedOrigins = 100'000'000;

// Literal loop over every crop origin. Rectangles without a placement use the
// centered placement; masks need one.
absl::StatusOr<InclusionProbability> EnumerateInclusion(
    const CropConfig& config, const PatchSpec& patch);

// Counter-based generator: output k of stream s under seed is a pure function
// of (seed, s, k), so chunked sampling reproduces on any thread count.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  uint64_t NextU64();
  // Uniform on the open interval (0, 1).
  double Uniform();
  double Normal();

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int64_t samples = 0;
};

// Importance-form estimate of H_alpha(M || Q): the mean of
// max(0, 1 - alpha dQ/dM) over samples from M. The pair is the forward mixture
// for epsilon >= 0 and the reverse mixture below.
absl::StatusOr<McEstimate> McHockeyStick(const SubsampledPair& pair,
                                         Alpha alpha, int64_t samples,
                                         uint64_t seed);
absl::StatusOr<McEstimate> McHockeyStick(const SubsampledPair& pair,
                                         Direction direction, Alpha alpha,
                                         int64_t samples, uint64_t seed);

// Simulates one noisy gradient step of the worst-case construction on a pair
// of neighboring datasets, reduced to the gradient's first coordinate. The
// differing image is drawn with probability gamma_wo; a crop is drawn
// uniformly from the origin space; the gradient is +kappa when the crop
// intersects the patch and -kappa otherwise, and every other sample
// contributes -kappa. Noise is N(0, sigma^2 kappa^2). Estimates H_{e^eps}
// between the two output distributions, with the dataset holding the patch
// first for eps >= 0 and second below.
absl::StatusOr<McEstimate> WorstCaseMechanismDivergence(
    double gamma_wo, const CropConfig& config, const PatchSpec& patch,
    double sigma, double epsilon, int64_t samples, uint64_t seed,
    double clipping_norm = 1.0);
// Same, with the order fixed: kForward puts the dataset holding the patch
// first, kReverse puts it second.
absl::StatusOr<McEstimate> WorstCaseMechanismDivergence(
    double gamma_wo, const CropConfig& config, const PatchSpec& patch,
    double sigma, Direction direction, double epsilon, int64_t samples,
    uint64_t seed, double clipping_norm = 1.0);

}  // namespace patchdp

#endif  // PATCHDP_ORACLE_H_
