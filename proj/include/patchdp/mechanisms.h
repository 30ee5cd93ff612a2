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

// End-to-end accounting for the three compared mechanisms:
//
//   PatchLevel     DP-SGD with random cropping; the patch enters a step with
//                  probability gamma_wo * gamma_crop.
//   MinibatchOnly  DP-SGD with minibatch subsampling only (gamma_wo).
//   DataNoise      Gaussian noise added once to the patch pixels, with
//                  l2-sensitivity 255 * sqrt(3 * pixels).
//
// The clipping norm is accepted for completeness only. Noise is sigma times
// the clipping norm, so the norm cancels from every divergence.

#ifndef PATCHDP_MECHANISMS_H_
#define PATCHDP_MECHANISMS_H_

#include <cstdint>
#include <optional>
#include <variant>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "patchdp/geometry.h"
#include "patchdp/pld.h"

namespace patchdp {

struct SamplingConfig {
  int64_t batch_size = 100;
  int64_t epoch_size = 3000;
  int64_t epochs = 100;

  double gamma_wo() const {
    return static_cast<double>(batch_size) / static_cast<double>(epoch_size);
  }
  // Drop-last batching: E * floor(n / m).
  int64_t steps() const { return epochs * (epoch_size / batch_size); }
  absl::Status Validate() const;
};

struct PatchLevel {
  CropConfig crop;
  PatchSpec patch;
};

struct MinibatchOnly {};

struct DataNoise {
  // Only the number of private pixels matters.
  int64_t pixel_count = 100;
  double sigma_data = 1000.0;
  // Compose over the training steps instead of releasing once.
  bool composed = false;
};

using MechanismVariant = std::variant<PatchLevel, MinibatchOnly, DataNoise>;

struct MechanismSpec {
  MechanismVariant variant;
  double sigma = 1.0;
  // Gradient sensitivity in units of the clipping norm: 1 for the add/remove
  // style pair N(1, sigma^2) vs N(0, sigma^2), 2 for substitution.
  double sensitivity = 1.0;
  double clipping_norm = 1.0;
  SamplingConfig sampling;

  absl::Status Validate() const;
};

// l2-sensitivity of the data-noise baseline: 255 * sqrt(3 * pixel_count).
double DataNoiseSensitivity(int64_t pixel_count);

// Resolved quantities behind a mechanism's curve.
struct MechanismSummary {
  // Sampling rate of the gradient step; 1 for DataNoise.
  double gamma_wo = 1.0;
  std::optional<WorstCaseInclusion> inclusion;
  double gamma_eff = 1.0;
  // Base Gaussian pair.
  GaussianPair pair;
  int64_t steps = 1;
};

absl::StatusOr<MechanismSummary> Summarize(const MechanismSpec& spec);

// Single-step privacy curve of the mechanism.
absl::StatusOr<PrivacyCurve> PrivacyCurveFor(const MechanismSpec& spec);

// Steps to compose: acct.steps when set, otherwise the sampling schedule
// (always 1 for one-shot DataNoise).
int64_t StepsFor(const MechanismSpec& spec, const AccountingConfig& acct);

struct AccountResult {
  double epsilon = 0.0;
  int64_t steps = 1;
  MechanismSummary summary;
};

// Discretize, compose and invert at `delta`. Epsilon is clamped at 0.
absl::StatusOr<AccountResult> AccountDetailed(const MechanismSpec& spec,
                                              const AccountingConfig& acct,
                                              double delta);
absl::StatusOr<double> Account(const MechanismSpec& spec,
                               const AccountingConfig& acct, double delta);

// Composed profile of the mechanism, for delta(eps) queries.
absl::StatusOr<ComposedProfile> ComposedProfileFor(const MechanismSpec& spec,
                                                   const AccountingConfig& acct);

struct CalibrationOptions {
  double tolerance = 1e-3;
  double sigma_start = 1.0;
  double sigma_min = 1e-3;
  double sigma_max = 1e3;
  int max_evaluations = 200;
};

struct CalibrationResult {
  double sigma = 0.0;
  double epsilon = 0.0;
  int evaluations = 0;
};

// Smallest sigma, to relative tolerance, with Account(...) <= target_epsilon.
// The returned sigma always satisfies the target. Fails with OutOfRange when
// even sigma_max does not.
absl::StatusOr<CalibrationResult> CalibrateSigma(
    const MechanismSpec& spec, const AccountingConfig& acct,
    double target_epsilon, double delta,
    const CalibrationOptions& options = {});

}  // namespace patchdp

#endif  // PATCHDP_MECHANISMS_H_
