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

#include "patchdp/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "absl/strings/str_format.h"
#include "patchdp/divergence.h"

namespace patchdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

PrivacyCurve SubsampledCurve(const SubsampledPair& pair,
                             std::string description) {
  PrivacyCurve curve(
      [pair](double eps) {
        return HockeyStickMixture(pair, Direction::kForward,
                                  Alpha::FromEpsilon(eps));
      },
      [pair](double eps) {
        return HockeyStickMixture(pair, Direction::kReverse,
                                  Alpha::FromEpsilon(eps));
      },
      std::move(description));
  curve.WithExcess(
      [pair](double eps) {
        return HockeyStickMixtureExcess(pair, Direction::kForward,
                                        Alpha::FromEpsilon(eps));
      },
      [pair](double eps) {
        return HockeyStickMixtureExcess(pair, Direction::kReverse,
                                        Alpha::FromEpsilon(eps));
      });
  return curve;
}

}  // namespace

absl::Status SamplingConfig::Validate() const {
  if (batch_size < 1 || batch_size > epoch_size) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "batch size must satisfy 1 <= m <= n, got m = %d, n = %d", batch_size,
        epoch_size));
  }
  if (epochs < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epochs must be at least 1, got %d", epochs));
  }
  return absl::OkStatus();
}

absl::Status MechanismSpec::Validate() const {
  if (!(clipping_norm > 0.0)) {
    return absl::InvalidArgumentError("clipping norm must be positive");
  }
  return std::visit(
      Overloaded{
          [&](const PatchLevel& p) -> absl::Status {
            if (absl::Status s = sampling.Validate(); !s.ok()) return s;
            if (absl::Status s = GaussianPair{sensitivity, sigma}.Validate();
                !s.ok()) {
              return s;
            }
            return p.crop.Validate();
          },
          [&](const MinibatchOnly&) -> absl::Status {
            if (absl::Status s = sampling.Validate(); !s.ok()) return s;
            return GaussianPair{sensitivity, sigma}.Validate();
          },
          [&](const DataNoise& d) -> absl::Status {
            if (d.pixel_count < 1) {
              return absl::InvalidArgumentError(
                  "data noise needs at least one private pixel");
            }
            if (!(d.sigma_data > 0.0) || !std::isfinite(d.sigma_data)) {
              return absl::InvalidArgumentError(absl::StrFormat(
                  "data noise sigma must be positive, got %g", d.sigma_data));
            }
            if (d.composed) return sampling.Validate();
            return absl::OkStatus();
          },
      },
      variant);
}

double DataNoiseSensitivity(int64_t pixel_count) {
  return 255.0 * std::sqrt(3.0 * static_cast<double>(pixel_count));
}

absl::StatusOr<MechanismSummary> Summarize(const MechanismSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  MechanismSummary summary;
  if (const auto* p = std::get_if<PatchLevel>(&spec.variant)) {
    absl::StatusOr<WorstCaseInclusion> inclusion =
        ResolveInclusion(p->crop, p->patch);
    if (!inclusion.ok()) return inclusion.status();
    summary.gamma_wo = spec.sampling.gamma_wo();
    absl::StatusOr<double> rate =
        EffectiveRate(summary.gamma_wo, inclusion->probability.value());
    if (!rate.ok()) return rate.status();
    summary.gamma_eff = *rate;
    summary.inclusion = *inclusion;
    summary.pair = GaussianPair{spec.sensitivity, spec.sigma};
    summary.steps = spec.sampling.steps();
  } else if (std::holds_alternative<MinibatchOnly>(spec.variant)) {
    summary.gamma_wo = spec.sampling.gamma_wo();
    summary.gamma_eff = summary.gamma_wo;
    summary.pair = GaussianPair{spec.sensitivity, spec.sigma};
    summary.steps = spec.sampling.steps();
  } else {
    const auto& d = std::get<DataNoise>(spec.variant);
    summary.gamma_wo = 1.0;
    summary.gamma_eff = 1.0;
    summary.pair = GaussianPair{DataNoiseSensitivity(d.pixel_count),
                                d.sigma_data};
    summary.steps = d.composed ? spec.sampling.steps() : 1;
  }
  return summary;
}

absl::StatusOr<PrivacyCurve> PrivacyCurveFor(const MechanismSpec& spec) {
  absl::StatusOr<MechanismSummary> summary = Summarize(spec);
  if (!summary.ok()) return summary.status();
  const SubsampledPair pair{summary->pair, summary->gamma_eff};
  const std::string description = std::visit(
      Overloaded{
          [&](const PatchLevel&) {
            return absl::StrFormat("patch-level s=%g sigma=%g gamma_eff=%.17g",
                                   pair.base.sensitivity, pair.base.sigma,
                                   pair.gamma_eff);
          },
          [&](const MinibatchOnly&) {
            return absl::StrFormat("minibatch s=%g sigma=%g gamma_wo=%.17g",
                                   pair.base.sensitivity, pair.base.sigma,
                                   pair.gamma_eff);
          },
          [&](const DataNoise&) {
            return absl::StrFormat("data-noise s=%.17g sigma=%g",
                                   pair.base.sensitivity, pair.base.sigma);
          },
      },
      spec.variant);
  return SubsampledCurve(pair, description);
}

int64_t StepsFor(const MechanismSpec& spec, const AccountingConfig& acct) {
  if (acct.steps.has_value()) return *acct.steps;
  if (const auto* d = std::get_if<DataNoise>(&spec.variant)) {
    return d->composed ? spec.sampling.steps() : 1;
  }
  return spec.sampling.steps();
}

absl::StatusOr<ComposedProfile> ComposedProfileFor(
    const MechanismSpec& spec, const AccountingConfig& acct) {
  absl::StatusOr<PrivacyCurve> curve = PrivacyCurveFor(spec);
  if (!curve.ok()) return curve.status();
  return ComposeCurve(*curve, StepsFor(spec, acct), acct);
}

absl::StatusOr<AccountResult> AccountDetailed(const MechanismSpec& spec,
                                              const AccountingConfig& acct,
                                              double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  absl::StatusOr<MechanismSummary> summary = Summarize(spec);
  if (!summary.ok()) return summary.status();
  absl::StatusOr<ComposedProfile> profile = ComposedProfileFor(spec, acct);
  if (!profile.ok()) return profile.status();
  absl::StatusOr<double> epsilon = profile->EpsilonAt(delta);
  if (!epsilon.ok()) return epsilon.status();
  AccountResult result;
  result.epsilon = std::max(0.0, *epsilon);
  result.steps = StepsFor(spec, acct);
  result.summary = *std::move(summary);
  return result;
}

absl::StatusOr<double> Account(const MechanismSpec& spec,
                               const AccountingConfig& acct, double delta) {
  absl::StatusOr<AccountResult> result = AccountDetailed(spec, acct, delta);
  if (!result.ok()) return result.status();
  return result->epsilon;
}

absl::StatusOr<CalibrationResult> CalibrateSigma(
    const MechanismSpec& spec, const AccountingConfig& acct,
    double target_epsilon, double delta, const CalibrationOptions& options) {
  if (!(target_epsilon > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "target epsilon must be positive, got %g", target_epsilon));
  }
  if (!(options.tolerance > 0.0)) {
    return absl::InvalidArgumentError("calibration tolerance must be positive");
  }
  if (std::holds_alternative<DataNoise>(spec.variant)) {
    return absl::InvalidArgumentError(
        "calibration applies to gradient-noise mechanisms only");
  }
  if (!(options.sigma_min > 0.0 && options.sigma_min <= options.sigma_start &&
        options.sigma_start <= options.sigma_max)) {
    return absl::InvalidArgumentError(
        "calibration needs 0 < sigma_min <= sigma_start <= sigma_max");
  }

  int evaluations = 0;
  // Grids too long for the accountant and unattainable deltas both mean the
  // noise is far too small, so they count as an infinite epsilon.
  auto epsilon_at = [&](double sigma) -> absl::StatusOr<double> {
    ++evaluations;
    MechanismSpec trial = spec;
    trial.sigma = sigma;
    absl::StatusOr<double> eps = Account(trial, acct, delta);
    if (eps.ok()) return *eps;
    if (absl::IsResourceExhausted(eps.status()) ||
        absl::IsFailedPrecondition(eps.status())) {
      return kInf;
    }
    return eps.status();
  };

  // Bracket: eps(lo) > target >= eps(hi).
  double lo;
  double hi;
  double eps_lo;
  double eps_hi;
  {
    absl::StatusOr<double> e = epsilon_at(options.sigma_start);
    if (!e.ok()) return e.status();
    if (*e <= target_epsilon) {
      hi = options.sigma_start;
      eps_hi = *e;
      for (;;) {
        lo = hi / 2;
        if (lo < options.sigma_min) {
          return CalibrationResult{hi, eps_hi, evaluations};
        }
        absl::StatusOr<double> el = epsilon_at(lo);
        if (!el.ok()) return el.status();
        eps_lo = *el;
        if (eps_lo > target_epsilon) break;
        hi = lo;
        eps_hi = eps_lo;
      }
    } else {
      lo = options.sigma_start;
      eps_lo = *e;
      for (;;) {
        hi = std::min(2 * lo, options.sigma_max);
        absl::StatusOr<double> eh = epsilon_at(hi);
        if (!eh.ok()) return eh.status();
        eps_hi = *eh;
        if (eps_hi <= target_epsilon) break;
        if (hi >= options.sigma_max) {
          return absl::OutOfRangeError(absl::StrFormat(
              "no sigma <= %g reaches epsilon %g (epsilon at sigma %g is %g)",
              options.sigma_max, target_epsilon, hi, eps_hi));
        }
        lo = hi;
        eps_lo = eps_hi;
      }
    }
  }

  // Safeguarded interpolation on log(eps) against log(sigma), falling back to
  // bisection whenever the lower end is infinite.
  const double floor = target_epsilon * (1.0 - options.tolerance) -
                       2.0 * acct.grid_spacing;
  const double log_target = std::log(target_epsilon);
  while (evaluations < options.max_evaluations) {
    const bool narrow = hi / lo - 1.0 <= options.tolerance;
    if (narrow && eps_hi >= floor) break;
    if (hi / lo - 1.0 <= 1e-13) break;
    const double a = std::log(lo);
    const double b = std::log(hi);
    double t = 0.5;
    if (std::isfinite(eps_lo) && eps_hi > 0.0 && !narrow) {
      const double fa = std::log(eps_lo) - log_target;
      const double fb = std::log(eps_hi) - log_target;
      if (fa > fb) t = std::clamp(fa / (fa - fb), 0.1, 0.9);
    }
    const double mid = std::exp(a + t * (b - a));
    absl::StatusOr<double> e = epsilon_at(mid);
    if (!e.ok()) return e.status();
    if (*e <= target_epsilon) {
      hi = mid;
      eps_hi = *e;
    } else {
      lo = mid;
      eps_lo = *e;
    }
  }
  return CalibrationResult{hi, eps_hi, evaluations};
}

}  // namespace patchdp
