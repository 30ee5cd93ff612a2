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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_format.h"
#include "patchdp/special_functions.h"

namespace patchdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// H_{e^log_c}(N(s, sigma^2) || N(0, sigma^2)) with r = s / sigma.
//   Phi(r/2 - log_c/r) - e^log_c * Phi(-r/2 - log_c/r)
double GaussianHockeyStickLog(double r, double log_c) {
  if (log_c == -kInf) return 1.0;
  if (log_c == kInf) return 0.0;
  const double a = 0.5 * r;
  const double b = log_c / r;
  const double upper = NormalCdf(a - b);
  const double tail = NormalCdf(-a - b);
  if (tail == 0.0) return upper;
  const double weighted =
      log_c < 700.0 ? std::exp(log_c) * tail : std::exp(log_c + std::log(tail));
  return std::max(0.0, upper - weighted);
}

// log(e^eps - (1 - gamma)), for e^eps > 1 - gamma.
double LogAlphaMinus(double eps, double gamma) {
  if (gamma == 1.0) return eps;
  const double shift = std::log1p(-gamma);
  const double t = eps - shift;
  return shift + (t > 30.0 ? t + std::log1p(-std::exp(-t))
                           : std::log(std::expm1(t)));
}

// 1 - e^eps (1 - gamma), for e^eps (1 - gamma) < 1.
double OneMinusAlphaScaled(double eps, double gamma) {
  return -std::expm1(eps + std::log1p(-gamma));
}

}  // namespace

absl::Status GaussianPair::Validate() const {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sensitivity must be positive, got %g", sensitivity));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("noise multiplier must be positive, got %g", sigma));
  }
  return absl::OkStatus();
}

absl::Status SubsampledPair::Validate() const {
  if (absl::Status s = base.Validate(); !s.ok()) return s;
  if (!(gamma_eff >= 0.0 && gamma_eff <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma_eff must lie in [0, 1], got %g", gamma_eff));
  }
  return absl::OkStatus();
}

double HockeyStickGaussian(const GaussianPair& pair, Alpha alpha) {
  return GaussianHockeyStickLog(pair.ratio(), alpha.epsilon());
}

double HockeyStickMixture(const SubsampledPair& pair, Direction direction,
                          Alpha alpha) {
  const double eps = alpha.epsilon();
  const double gamma = pair.gamma_eff;
  const double r = pair.base.ratio();
  if (eps == kInf) return 0.0;
  if (gamma == 0.0) return eps < 0.0 ? -std::expm1(eps) : 0.0;

  if (direction == Direction::kForward) {
    // integral of (g p - (alpha - 1 + g) q)_+
    if (eps <= std::log1p(-gamma)) return -std::expm1(eps);
    const double log_c = LogAlphaMinus(eps, gamma) - std::log(gamma);
    return gamma * GaussianHockeyStickLog(r, log_c);
  }

  // integral of ((1 - alpha (1 - g)) p - alpha g q)_+
  if (eps == -kInf) return 1.0;
  if (gamma < 1.0 && eps >= -std::log1p(-gamma)) return 0.0;
  const double k = OneMinusAlphaScaled(eps, gamma);
  if (!(k > 0.0)) return 0.0;
  const double log_c = eps + std::log(gamma) - std::log(k);
  return k * GaussianHockeyStickLog(r, log_c);
}

// Uses H_a(P || Q) = 1 - a + a H_{1/a}(Q || P) on the inner Gaussian pair,
// whose hockey-stick curve is symmetric under swapping P and Q.
double HockeyStickMixtureExcess(const SubsampledPair& pair,
                                Direction direction, Alpha alpha) {
  const double eps = alpha.epsilon();
  const double gamma = pair.gamma_eff;
  const double r = pair.base.ratio();
  if (eps == -kInf || gamma == 0.0) return 0.0;
  if (eps == kInf) return kInf;

  if (direction == Direction::kForward) {
    if (eps <= std::log1p(-gamma)) return 0.0;
    const double log_scale = LogAlphaMinus(eps, gamma);
    const double log_c = log_scale - std::log(gamma);
    return std::exp(log_scale) * GaussianHockeyStickLog(r, -log_c);
  }
  if (gamma < 1.0 && eps >= -std::log1p(-gamma)) return std::expm1(eps);
  const double k = OneMinusAlphaScaled(eps, gamma);
  if (!(k > 0.0)) return std::expm1(eps);
  const double log_scale = eps + std::log(gamma);
  const double log_c = log_scale - std::log(k);
  return std::exp(log_scale) * GaussianHockeyStickLog(r, -log_c);
}

double HockeyStickSubsampled(const SubsampledPair& pair, Alpha alpha) {
  return HockeyStickMixture(
      pair, alpha.epsilon() >= 0.0 ? Direction::kForward : Direction::kReverse,
      alpha);
}

double NaiveAmplifiedEpsilon(double gamma, double eps_base) {
  return std::log1p(gamma * std::expm1(eps_base));
}

double GaussianMixture1D::Density(double x) const {
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    total += weights[i] * NormalPdf((x - means[i]) / sigma);
  }
  return total / sigma;
}

MixturePair MixturesFor(const SubsampledPair& pair, Direction direction) {
  const double s = pair.base.sensitivity;
  const double sigma = pair.base.sigma;
  const double g = pair.gamma_eff;
  const GaussianMixture1D p{{1.0}, {s}, sigma};
  const GaussianMixture1D q{{1.0}, {0.0}, sigma};
  const GaussianMixture1D mixed{{1.0 - g, g}, {0.0, s}, sigma};
  const GaussianMixture1D mixed_reverse{{1.0 - g, g}, {s, 0.0}, sigma};
  if (direction == Direction::kForward) return {mixed, q};
  return {p, mixed_reverse};
}

}  // namespace patchdp
