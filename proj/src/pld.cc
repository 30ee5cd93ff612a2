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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/strings/str_format.h"
#include "patchdp/convolution.h"

namespace patchdp {
namespace {

constexpr double kMonotoneSlack = 1e-12;
constexpr double kFftNoise = 1e-15;

// Index searches below never look further than this many grid points away
// from loss 0.
int64_t SearchCap(const AccountingConfig& config) {
  return 4 * config.max_grid_length;
}

// Smallest i with pred(i) true, for pred monotone false -> true in i.
template <typename Pred>
absl::StatusOr<int64_t> FirstTrue(Pred pred, int64_t start, int64_t cap) {
  int64_t lo;
  int64_t hi;
  int64_t step = 1;
  if (pred(start)) {
    hi = start;
    lo = start - 1;
    while (pred(lo)) {
      hi = lo;
      step *= 2;
      lo = hi - step;
      if (start - lo > cap) {
        return absl::ResourceExhaustedError(
            "privacy curve grid search exceeded the maximum grid length");
      }
    }
  } else {
    lo = start;
    hi = start + 1;
    while (!pred(hi)) {
      lo = hi;
      step *= 2;
      hi = lo + step;
      if (hi - start > cap) {
        return absl::ResourceExhaustedError(
            "privacy curve does not fall below the truncation mass within "
            "the maximum grid length");
      }
    }
  }
  while (hi - lo > 1) {
    const int64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void TrimZeros(std::vector<double>& masses, int64_t& lowest_index) {
  size_t first = 0;
  while (first + 1 < masses.size() && masses[first] == 0.0) ++first;
  size_t last = masses.size();
  while (last > first + 1 && masses[last - 1] == 0.0) --last;
  if (first > 0 || last < masses.size()) {
    masses = std::vector<double>(masses.begin() + first, masses.begin() + last);
    lowest_index += static_cast<int64_t>(first);
  }
}

// Truncates both tails, each by at most half the truncation budget. The lower
// tail is pushed onto the lowest kept loss and the upper tail onto the
// infinity atom.
void TruncateTails(std::vector<double>& masses, int64_t& lowest_index,
                   double& infinity_mass, double truncation) {
  const double budget = 0.5 * truncation;
  size_t first = 0;
  double lower = 0.0;
  while (first + 1 < masses.size() && lower + masses[first] <= budget) {
    lower += masses[first++];
  }
  size_t last = masses.size() - 1;
  double upper = 0.0;
  while (last > first && upper + masses[last] <= budget) {
    upper += masses[last--];
  }
  masses[first] += lower;
  infinity_mass += upper;
  masses = std::vector<double>(masses.begin() + first,
                               masses.begin() + last + 1);
  lowest_index += static_cast<int64_t>(first);
  TrimZeros(masses, lowest_index);
}

long double SumLong(const std::vector<double>& v) {
  long double total = 0.0L;
  for (double x : v) total += x;
  return total;
}

// Restores the finite mass to `target` after rounding and clamping. A deficit
// goes to `deficit_sink`, which must only raise delta. An excess, which only
// clamped rounding noise can create, is removed from the lowest losses, where
// it changes delta the least.
void RepairMass(std::vector<double>& masses, double target,
                double& deficit_sink) {
  const long double total = SumLong(masses);
  if (total <= target) {
    deficit_sink += static_cast<double>(target - total);
    return;
  }
  auto excess = static_cast<double>(total - target);
  for (double& m : masses) {
    if (excess <= 0.0) break;
    const double take = std::min(m, excess);
    m -= take;
    excess -= take;
  }
}

// PLD whose curve is the chord interpolation, in alpha = e^eps, of the grid
// values d[k] = delta(eps_k), extended on the left by the chord to
// (alpha = 0, delta = 1); d.back() becomes the infinity mass. Masses are second
// differences of the curve. Below loss 0 they are taken from the excess
// g[k] = d[k] - (1 - alpha_k), which has the same second differences (the
// removed part is linear in alpha) without the cancellation.
DiscretePld ChordPld(double spacing, int64_t lowest,
                     const std::vector<double>& d,
                     const std::vector<double>& g) {
  const size_t n = d.size();
  const double step = std::expm1(spacing);
  const double grow = std::exp(spacing);
  std::vector<double> masses(n);
  for (size_t k = 0; k < n; ++k) {
    const double loss = static_cast<double>(lowest + static_cast<int64_t>(k)) *
                        spacing;
    const bool excess = loss < 0.0;
    const std::vector<double>& x = excess ? g : d;
    double m;
    if (n == 1) {
      m = 1.0 - d[0];
    } else if (k == 0) {
      m = excess ? (g[1] - g[0]) / step - g[0]
                 : (1.0 - d[0]) - (d[0] - d[1]) / step;
    } else if (k + 1 == n) {
      m = grow * (x[k - 1] - x[k]) / step + (excess ? std::exp(loss) : 0.0);
    } else {
      m = (grow * (x[k - 1] - x[k]) - (x[k] - x[k + 1])) / step;
    }
    masses[k] = std::max(0.0, m);
  }
  double infinity = d[n - 1];
  // Rounding deficits here would be compounded over every step if sent to
  // infinity, so they go to the highest finite loss instead.
  RepairMass(masses, 1.0 - d[n - 1], masses.back());
  TrimZeros(masses, lowest);
  return DiscretePld(spacing, lowest, std::move(masses), infinity);
}

// Standard deviation of the finite losses under their normalized masses.
double LossStd(const DiscretePld& pld) {
  double total = 0.0;
  double mean = 0.0;
  for (size_t i = 0; i < pld.size(); ++i) {
    total += pld.masses()[i];
    mean += pld.masses()[i] * static_cast<double>(i);
  }
  if (!(total > 0.0)) return 0.0;
  mean /= total;
  double var = 0.0;
  for (size_t i = 0; i < pld.size(); ++i) {
    const double x = static_cast<double>(i) - mean;
    var += pld.masses()[i] * x * x;
  }
  return std::sqrt(var / total) * pld.grid_spacing();
}

bool UseDirect(size_t a, size_t b, ConvolutionMethod method) {
  switch (method) {
    case ConvolutionMethod::kDirect:
      return true;
    case ConvolutionMethod::kFft:
      return false;
    case ConvolutionMethod::kAuto:
      break;
  }
  return std::min(a, b) <= 48 || a * b <= (size_t{1} << 20);
}

}  // namespace

absl::Status AccountingConfig::Validate() const {
  if (steps.has_value() && *steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("steps must be at least 1, got %d", *steps));
  }
  if (!(grid_spacing > 0.0) || !std::isfinite(grid_spacing)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("grid spacing must be positive, got %g", grid_spacing));
  }
  if (!(tail_mass_truncation >= 0.0 && tail_mass_truncation < 1e-3)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "tail mass truncation must lie in [0, 1e-3), got %g",
        tail_mass_truncation));
  }
  if (max_grid_length < 2) {
    return absl::InvalidArgumentError("max grid length must be at least 2");
  }
  return absl::OkStatus();
}

double DiscretePld::TotalMass() const {
  return static_cast<double>(SumLong(masses_) + infinity_mass_);
}

double DiscretePld::DeltaAt(double epsilon) const {
  double delta = 0.0;
  for (size_t i = masses_.size(); i-- > 0;) {
    const double loss = Loss(i);
    if (loss <= epsilon) break;
    delta += masses_[i] * -std::expm1(epsilon - loss);
  }
  return std::min(1.0, delta + infinity_mass_);
}

absl::StatusOr<double> DiscretePld::EpsilonAt(double delta,
                                              bool snap_to_grid) const {
  if (!(delta > infinity_mass_)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "delta %g is unattainable: infinity mass is %g", delta,
        infinity_mass_));
  }
  // DeltaAt(Loss(n - 1)) == infinity_mass < delta, so a solution exists.
  size_t lo = 0;
  size_t hi = masses_.size() - 1;
  if (DeltaAt(Loss(0)) <= delta) return Loss(0);
  while (hi - lo > 1) {
    const size_t mid = lo + (hi - lo) / 2;
    if (DeltaAt(Loss(mid)) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double right = Loss(hi);
  if (snap_to_grid) return right;

  // On (Loss(lo), Loss(hi)] the curve is A - e^eps * B with A, B sums over
  // the atoms at index >= hi. Solve relative to e^{Loss(hi)} for stability.
  double a = infinity_mass_;
  double b = 0.0;
  for (size_t i = hi; i < masses_.size(); ++i) {
    a += masses_[i];
    b += masses_[i] * std::exp(right - Loss(i));
  }
  if (!(b > 0.0) || !(a > delta)) return right;
  const double eps = right + std::log((a - delta) / b);
  return std::clamp(eps, Loss(lo), right);
}

absl::StatusOr<DiscretePld> Discretize(const PrivacyCurve& curve,
                                       Direction direction,
                                       const AccountingConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const double spacing = config.grid_spacing;
  const double truncation = config.tail_mass_truncation;
  const PrivacyCurve::Evaluator& delta = curve.evaluator(direction);
  auto at = [&](int64_t i) { return delta(static_cast<double>(i) * spacing); };

  absl::StatusOr<int64_t> top = FirstTrue(
      [&](int64_t i) { return at(i) <= truncation; }, 0, SearchCap(config));
  if (!top.ok()) return top.status();

  // Excess over the all-mass line 1 - e^eps is non-decreasing in eps.
  auto excess_at = [&](int64_t i) {
    return curve.Excess(static_cast<double>(i) * spacing, direction);
  };
  auto excess_small = [&](int64_t i) { return excess_at(i) <= truncation; };
  int64_t bottom = *top;
  if (!excess_small(bottom)) {
    absl::StatusOr<int64_t> first_large = FirstTrue(
        [&](int64_t i) { return !excess_small(i); }, *top,
        SearchCap(config));
    if (!first_large.ok()) return first_large.status();
    bottom = *first_large - 1;
  }

  const int64_t length = *top - bottom + 1;
  if (length > config.max_grid_length) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "discretized curve needs %d grid points, more than the maximum %d",
        length, config.max_grid_length));
  }

  std::vector<double> d(length);
  std::vector<double> g(length);
  for (int64_t k = 0; k < length; ++k) {
    d[k] = std::clamp(at(bottom + k), 0.0, 1.0);
    g[k] = std::max(0.0, excess_at(bottom + k));
    if (k > 0 && d[k] > d[k - 1] + kMonotoneSlack) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "privacy curve is not monotone: delta(%g) = %.17g > delta(%g) = "
          "%.17g",
          (bottom + k) * spacing, d[k], (bottom + k - 1) * spacing, d[k - 1]));
    }
  }
  return ChordPld(spacing, bottom, d, g);
}

absl::StatusOr<DiscretePld> Coarsen(const DiscretePld& pld, int64_t factor) {
  if (factor < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("coarsening factor must be at least 1, got %d", factor));
  }
  if (factor == 1) return pld;
  const double fine = pld.grid_spacing();
  const double spacing = fine * static_cast<double>(factor);
  auto floor_div = [factor](int64_t a) {
    return a / factor - ((a % factor != 0) && (a < 0));
  };
  const int64_t k_lo = floor_div(pld.lowest_index());
  const int64_t k_hi = -floor_div(-pld.highest_index());
  std::vector<double> masses(static_cast<size_t>(k_hi - k_lo + 1), 0.0);
  // An atom at a + r * fine, a on the coarse grid, keeps the curve's chord
  // between a and a + spacing when it puts weight
  // (1 - e^{-r fine}) / (1 - e^{-spacing}) on the upper point.
  const double denominator = std::expm1(-spacing);
  for (size_t i = 0; i < pld.size(); ++i) {
    const double m = pld.masses()[i];
    if (m == 0.0) continue;
    const int64_t index = pld.lowest_index() + static_cast<int64_t>(i);
    const int64_t k = floor_div(index);
    const int64_t r = index - k * factor;
    const size_t slot = static_cast<size_t>(k - k_lo);
    if (r == 0) {
      masses[slot] += m;
      continue;
    }
    const double upper =
        m * (std::expm1(-static_cast<double>(r) * fine) / denominator);
    masses[slot] += m - upper;
    masses[slot + 1] += upper;
  }
  int64_t lowest = k_lo;
  TrimZeros(masses, lowest);
  return DiscretePld(spacing, lowest, std::move(masses), pld.infinity_mass());
}

absl::StatusOr<DiscretePld> Convolve(const DiscretePld& a,
                                     const DiscretePld& b,
                                     const AccountingConfig& config) {
  if (std::abs(a.grid_spacing() - b.grid_spacing()) >
      1e-12 * a.grid_spacing()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot compose PLDs with grid spacings %g and %g", a.grid_spacing(),
        b.grid_spacing()));
  }
  const size_t length = a.size() + b.size() - 1;
  if (static_cast<int64_t>(length) > config.max_grid_length) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "composed PLD needs %d grid points, more than the maximum %d", length,
        config.max_grid_length));
  }
  const bool direct = UseDirect(a.size(), b.size(), config.convolution);
  std::vector<double> masses = direct ? ConvolveDirect(a.masses(), b.masses())
                                      : ConvolveFft(a.masses(), b.masses());
  // FFT output carries absolute noise proportional to the largest entry;
  // entries below it carry no information.
  const double floor =
      direct ? 0.0
             : kFftNoise * *std::max_element(masses.begin(), masses.end());
  for (double& m : masses) {
    if (m <= floor) m = 0.0;
  }
  int64_t lowest = a.lowest_index() + b.lowest_index();
  double infinity = a.infinity_mass() + b.infinity_mass() -
                    a.infinity_mass() * b.infinity_mass();
  // Exact composition keeps sum + infinity = 1, so the finite target follows
  // from the infinity masses alone; this also cancels drift in the inputs.
  RepairMass(masses, (1.0 - a.infinity_mass()) * (1.0 - b.infinity_mass()),
             infinity);
  TruncateTails(masses, lowest, infinity, config.tail_mass_truncation);
  return DiscretePld(a.grid_spacing(), lowest, std::move(masses), infinity);
}

absl::StatusOr<DiscretePld> Compose(const DiscretePld& pld, int64_t steps,
                                    const AccountingConfig& config) {
  if (steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("steps must be at least 1, got %d", steps));
  }
  std::optional<DiscretePld> result;
  DiscretePld base = pld;
  for (int64_t remaining = steps;;) {
    if (remaining & 1) {
      if (result.has_value()) {
        absl::StatusOr<DiscretePld> next = Convolve(*result, base, config);
        if (!next.ok()) return next.status();
        result = *std::move(next);
      } else {
        result = base;
      }
    }
    remaining >>= 1;
    if (remaining == 0) break;
    absl::StatusOr<DiscretePld> squared = Convolve(base, base, config);
    if (!squared.ok()) return squared.status();
    base = *std::move(squared);
  }
  return *std::move(result);
}

absl::StatusOr<DiscretePld> ComposeSequential(const DiscretePld& pld,
                                              int64_t steps,
                                              const AccountingConfig& config) {
  if (steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("steps must be at least 1, got %d", steps));
  }
  DiscretePld result = pld;
  for (int64_t t = 1; t < steps; ++t) {
    absl::StatusOr<DiscretePld> next = Convolve(result, pld, config);
    if (!next.ok()) return next.status();
    result = *std::move(next);
  }
  return result;
}

double ComposedProfile::DeltaAt(double epsilon) const {
  double delta = 0.0;
  if (forward_.has_value()) delta = std::max(delta, forward_->DeltaAt(epsilon));
  if (reverse_.has_value()) delta = std::max(delta, reverse_->DeltaAt(epsilon));
  return delta;
}

absl::StatusOr<double> ComposedProfile::EpsilonAt(double delta) const {
  double epsilon = -std::numeric_limits<double>::infinity();
  for (const auto* pld : {&forward_, &reverse_}) {
    if (!pld->has_value()) continue;
    absl::StatusOr<double> e = (*pld)->EpsilonAt(delta);
    if (!e.ok()) return e.status();
    epsilon = std::max(epsilon, *e);
  }
  return epsilon;
}

namespace {

// Grid points per standard deviation of the loss the adaptive grid keeps.
constexpr double kPointsPerStd = 32.0;
constexpr int kMaxRefinements = 16;

absl::StatusOr<DiscretePld> CoarsenToFit(const DiscretePld& pld,
                                         double max_spacing) {
  const double sd = LossStd(pld);
  int64_t factor = 1;
  while (pld.grid_spacing() * static_cast<double>(2 * factor) <=
             max_spacing * (1 + 1e-9) &&
         sd >= kPointsPerStd * pld.grid_spacing() *
                   static_cast<double>(2 * factor)) {
    factor *= 2;
  }
  return Coarsen(pld, factor);
}

absl::StatusOr<DiscretePld> ComposeAdaptive(const PrivacyCurve& curve,
                                            Direction direction,
                                            int64_t steps,
                                            const AccountingConfig& config) {
  if (steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("steps must be at least 1, got %d", steps));
  }
  AccountingConfig fine = config;
  absl::StatusOr<DiscretePld> single = Discretize(curve, direction, fine);
  if (!single.ok()) return single.status();
  for (int r = 0; r < kMaxRefinements &&
                  LossStd(*single) < kPointsPerStd * fine.grid_spacing;
       ++r) {
    fine.grid_spacing /= 2;
    absl::StatusOr<DiscretePld> finer = Discretize(curve, direction, fine);
    if (absl::IsResourceExhausted(finer.status())) break;
    if (!finer.ok()) return finer.status();
    single = *std::move(finer);
  }

  std::optional<DiscretePld> result;
  DiscretePld base = *std::move(single);
  for (int64_t remaining = steps;;) {
    if (remaining & 1) {
      if (result.has_value()) {
        const int64_t ratio =
            std::llround(base.grid_spacing() / result->grid_spacing());
        absl::StatusOr<DiscretePld> aligned = Coarsen(*result, ratio);
        if (!aligned.ok()) return aligned.status();
        absl::StatusOr<DiscretePld> next = Convolve(*aligned, base, config);
        if (!next.ok()) return next.status();
        result = *std::move(next);
      } else {
        result = base;
      }
    }
    remaining >>= 1;
    if (remaining == 0) break;
    absl::StatusOr<DiscretePld> squared = Convolve(base, base, config);
    if (!squared.ok()) return squared.status();
    absl::StatusOr<DiscretePld> fitted =
        CoarsenToFit(*squared, config.grid_spacing);
    if (!fitted.ok()) return fitted.status();
    base = *std::move(fitted);
  }
  return *std::move(result);
}

}  // namespace

absl::StatusOr<ComposedProfile> ComposeCurve(const PrivacyCurve& curve,
                                             int64_t steps,
                                             const AccountingConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  auto one = [&](Direction direction) -> absl::StatusOr<DiscretePld> {
    if (config.adaptive_grid) {
      return ComposeAdaptive(curve, direction, steps, config);
    }
    absl::StatusOr<DiscretePld> single = Discretize(curve, direction, config);
    if (!single.ok()) return single.status();
    return Compose(*single, steps, config);
  };
  std::optional<DiscretePld> forward;
  std::optional<DiscretePld> reverse;
  if (config.direction != DirectionMode::kReverse) {
    absl::StatusOr<DiscretePld> f = one(Direction::kForward);
    if (!f.ok()) return f.status();
    forward = *std::move(f);
  }
  if (config.direction != DirectionMode::kForward) {
    absl::StatusOr<DiscretePld> r = one(Direction::kReverse);
    if (!r.ok()) return r.status();
    reverse = *std::move(r);
  }
  return ComposedProfile(std::move(forward), std::move(reverse));
}

}  // namespace patchdp
