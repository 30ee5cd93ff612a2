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

// Privacy loss distributions on an arithmetic epsilon grid.
//
// A single-step privacy curve delta(eps) is quantized with the connect-the-dots
// construction: the discrete distribution's hockey-stick curve, as a function
// of alpha = e^eps, is the chord interpolation of the source curve between
// consecutive grid points. The source curve is convex in alpha, so the chords
// lie above it and the discrete distribution is a valid (pessimistic)
// dominating pair. Composition convolves masses on the shared integer grid, so
// no rounding is needed there; tail truncation always moves mass upward (lower
// tail onto the lowest kept loss, upper tail to the infinity atom).

#ifndef PATCHDP_PLD_H_
#define PATCHDP_PLD_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "patchdp/divergence.h"

namespace patchdp {

// A single-step privacy profile. Holds the full hockey-stick curve of both
// mixture directions; Delta(eps) is the combined profile that uses the forward
// curve for eps >= 0 and the reverse curve below.
//
// A curve may also supply its excess delta(eps) - (1 - e^eps) directly. For
// eps < 0 the excess is much smaller than delta, and the discretization
// needs it to full relative precision.
class PrivacyCurve {
 public:
  using Evaluator = std::function<double(double epsilon)>;

  PrivacyCurve(Evaluator forward, Evaluator reverse, std::string description)
      : forward_(std::move(forward)),
        reverse_(std::move(reverse)),
        description_(std::move(description)) {}

  // Both directions share one curve (symmetric pairs such as N(s) vs N(0)).
  static PrivacyCurve Symmetric(Evaluator curve, std::string description) {
    Evaluator copy = curve;
    return PrivacyCurve(std::move(curve), std::move(copy),
                        std::move(description));
  }

  PrivacyCurve& WithExcess(Evaluator forward, Evaluator reverse) {
    forward_excess_ = std::move(forward);
    reverse_excess_ = std::move(reverse);
    return *this;
  }

  double Delta(double epsilon) const {
    return epsilon >= 0.0 ? forward_(epsilon) : reverse_(epsilon);
  }
  double Delta(double epsilon, Direction direction) const {
    return direction == Direction::kForward ? forward_(epsilon)
                                            : reverse_(epsilon);
  }
  double Excess(double epsilon, Direction direction) const {
    const Evaluator& excess = direction == Direction::kForward
                                  ? forward_excess_
                                  : reverse_excess_;
    if (excess) return excess(epsilon);
    return Delta(epsilon, direction) + std::expm1(epsilon);
  }
  const Evaluator& evaluator(Direction direction) const {
    return direction == Direction::kForward ? forward_ : reverse_;
  }
  const std::string& description() const { return description_; }

 private:
  Evaluator forward_;
  Evaluator reverse_;
  Evaluator forward_excess_;
  Evaluator reverse_excess_;
  std::string description_;
};

enum class DirectionMode { kForward, kReverse, kBoth };
enum class ConvolutionMethod { kAuto, kDirect, kFft };

struct AccountingConfig {
  // Number of composed steps. Unset means "derive from the sampling
  // configuration" for mechanism-level accounting.
  std::optional<int64_t> steps;
  double grid_spacing = 1e-3;
  double tail_mass_truncation = 1e-15;
  DirectionMode direction = DirectionMode::kBoth;
  ConvolutionMethod convolution = ConvolutionMethod::kAuto;
  // When set, grid_spacing is the final (coarsest) spacing: the single step
  // is discretized on a grid fine enough to resolve its loss spread and the
  // grid is coarsened as composition widens the distribution. When unset,
  // every step uses grid_spacing directly.
  bool adaptive_grid = true;
  // Overflow guard on the number of grid points of any intermediate PLD.
  int64_t max_grid_length = int64_t{1} << 24;

  absl::Status Validate() const;
};

class DiscretePld {
 public:
  DiscretePld(double grid_spacing, int64_t lowest_index,
              std::vector<double> masses, double infinity_mass)
      : grid_spacing_(grid_spacing),
        lowest_index_(lowest_index),
        masses_(std::move(masses)),
        infinity_mass_(infinity_mass) {}

  // Point mass at loss 0.
  static DiscretePld Identity(double grid_spacing) {
    return DiscretePld(grid_spacing, 0, {1.0}, 0.0);
  }

  double grid_spacing() const { return grid_spacing_; }
  int64_t lowest_index() const { return lowest_index_; }
  int64_t highest_index() const {
    return lowest_index_ + static_cast<int64_t>(masses_.size()) - 1;
  }
  const std::vector<double>& masses() const { return masses_; }
  double infinity_mass() const { return infinity_mass_; }
  size_t size() const { return masses_.size(); }
  double Loss(size_t i) const {
    return static_cast<double>(lowest_index_ + static_cast<int64_t>(i)) *
           grid_spacing_;
  }
  double TotalMass() const;

  // delta(eps) = sum_i mass_i * max(0, 1 - e^{eps - loss_i}) + infinity_mass.
  double DeltaAt(double epsilon) const;

  // Smallest epsilon with DeltaAt(epsilon) <= delta. The discrete curve is
  // linear in e^eps between grid points, so the crossing is solved exactly
  // inside the last segment; with `snap_to_grid` the grid point at the right
  // end of that segment is returned instead. Fails with FailedPrecondition
  // when delta <= infinity_mass.
  absl::StatusOr<double> EpsilonAt(double delta,
                                   bool snap_to_grid = false) const;

 private:
  double grid_spacing_;
  int64_t lowest_index_;
  std::vector<double> masses_;
  double infinity_mass_;
};

// Connect-the-dots quantization of one direction of `curve`. The grid runs
// from the largest loss below which the curve is within tail_mass_truncation
// of 1 - e^eps, to the first grid point where delta <= tail_mass_truncation;
// the remaining delta becomes the infinity mass.
absl::StatusOr<DiscretePld> Discretize(const PrivacyCurve& curve,
                                       Direction direction,
                                       const AccountingConfig& config);

// Re-quantizes `pld` onto the grid with spacing factor * grid_spacing. Each
// atom is split between the two enclosing coarse grid points, which is the
// chord construction applied to its curve, so the result dominates the input
// and mass is conserved exactly.
absl::StatusOr<DiscretePld> Coarsen(const DiscretePld& pld, int64_t factor);

// Composition of two PLDs on the same grid, followed by tail truncation.
absl::StatusOr<DiscretePld> Convolve(const DiscretePld& a,
                                     const DiscretePld& b,
                                     const AccountingConfig& config);

// T-fold self-composition by repeated squaring.
absl::StatusOr<DiscretePld> Compose(const DiscretePld& pld, int64_t steps,
                                    const AccountingConfig& config);

// T-fold self-composition by T - 1 sequential convolutions. Reference path.
absl::StatusOr<DiscretePld> ComposeSequential(const DiscretePld& pld,
                                              int64_t steps,
                                              const AccountingConfig& config);

// The composed forward and/or reverse PLDs of one mechanism. Queries report
// the worst case over the directions present.
class ComposedProfile {
 public:
  ComposedProfile(std::optional<DiscretePld> forward,
                  std::optional<DiscretePld> reverse)
      : forward_(std::move(forward)), reverse_(std::move(reverse)) {}

  double DeltaAt(double epsilon) const;
  absl::StatusOr<double> EpsilonAt(double delta) const;

  const std::optional<DiscretePld>& forward() const { return forward_; }
  const std::optional<DiscretePld>& reverse() const { return reverse_; }

 private:
  std::optional<DiscretePld> forward_;
  std::optional<DiscretePld> reverse_;
};

// Discretizes the directions selected by config.direction and composes each
// `steps` times, on the adaptive grid when config.adaptive_grid is set.
absl::StatusOr<ComposedProfile> ComposeCurve(const PrivacyCurve& curve,
                                             int64_t steps,
                                             const AccountingConfig& config);

}  // namespace patchdp

#endif  // PATCHDP_PLD_H_
