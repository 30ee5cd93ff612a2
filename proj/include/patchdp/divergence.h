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

// Hockey-stick divergences H_alpha(P || Q) = integral of max(dP - alpha dQ, 0)
// for the Gaussian dominating pair P = N(s, sigma^2), Q = N(0, sigma^2) and for
// its subsampled mixtures.
//
// Sensitivity convention: the default s = 1 is the textbook dominating pair of
// a Gaussian mechanism with unit sensitivity. DP-SGD under the substitution
// relation, with clipping norm kappa and noise sigma * kappa, is tightly
// dominated by the pair with s = 2. The clipping norm itself cancels. Callers
// pick the convention through GaussianPair::sensitivity; every divergence
// depends on (s, sigma) only through s / sigma.

#ifndef PATCHDP_DIVERGENCE_H_
#define PATCHDP_DIVERGENCE_H_

#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace patchdp {

// alpha = e^epsilon. Stored as epsilon so that alpha near 0 and very large
// alpha stay representable.
class Alpha {
 public:
  static Alpha FromEpsilon(double epsilon) { return Alpha(epsilon); }
  // alpha >= 0; alpha = 0 maps to epsilon = -inf.
  static Alpha FromValue(double alpha) { return Alpha(std::log(alpha)); }

  double epsilon() const { return epsilon_; }
  double value() const { return std::exp(epsilon_); }

 private:
  explicit Alpha(double epsilon) : epsilon_(epsilon) {}
  double epsilon_;
};

struct GaussianPair {
  double sensitivity = 1.0;
  double sigma = 1.0;

  double ratio() const { return sensitivity / sigma; }
  absl::Status Validate() const;
};

// Which mixture pair of the subsampled mechanism to evaluate.
//   kForward: H((1 - g) Q + g P || Q)   (the alpha >= 1 branch)
//   kReverse: H(P || (1 - g) P + g Q)   (the alpha < 1 branch)
enum class Direction { kForward, kReverse };

struct SubsampledPair {
  GaussianPair base;
  double gamma_eff = 1.0;

  absl::Status Validate() const;
};

// H_alpha(P || Q) for the Gaussian pair.
double HockeyStickGaussian(const GaussianPair& pair, Alpha alpha);

// Full curve of one mixture direction at any alpha >= 0.
double HockeyStickMixture(const SubsampledPair& pair, Direction direction,
                          Alpha alpha);

// H_alpha - (1 - alpha) for the same mixture pair, evaluated without the
// cancellation that subtracting would cause when H_alpha is close to 1 - alpha
// (alpha < 1 and small gamma_eff).
double HockeyStickMixtureExcess(const SubsampledPair& pair,
                                Direction direction, Alpha alpha);

// The tight subsampled bound: forward mixture for alpha >= 1, reverse mixture
// for alpha < 1. Continuous at alpha = 1.
double HockeyStickSubsampled(const SubsampledPair& pair, Alpha alpha);

// log(1 + gamma (e^eps_base - 1)): the classical amplification bound.
double NaiveAmplifiedEpsilon(double gamma, double eps_base);

// A finite mixture of Gaussians with a common standard deviation, used as the
// input of the quadrature oracle.
struct GaussianMixture1D {
  std::vector<double> weights;
  std::vector<double> means;
  double sigma = 1.0;

  double Density(double x) const;
};

// Both mixture components (numerator, denominator) for a subsampled pair.
struct MixturePair {
  GaussianMixture1D numerator;
  GaussianMixture1D denominator;
};
MixturePair MixturesFor(const SubsampledPair& pair, Direction direction);

// Adaptive Gauss-Kronrod quadrature of the integral of max(p - alpha q, 0)
// over the real line. Crossing points of p - alpha q are located numerically
// and used as breakpoints. Fails with Internal if the estimated absolute error
// exceeds `tolerance`.
absl::StatusOr<double> HockeyStickNumeric(const GaussianMixture1D& numerator,
                                          const GaussianMixture1D& denominator,
                                          Alpha alpha, double tolerance);

}  // namespace patchdp

#endif  // PATCHDP_DIVERGENCE_H_
