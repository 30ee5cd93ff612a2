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

// Numeric hockey-stick divergence. This is an oracle for the closed forms in
// divergence.cc and shares no code with them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "absl/strings/str_format.h"
#include "patchdp/divergence.h"

namespace patchdp {
namespace {

constexpr int kScanPoints = 8000;
constexpr double kSupportSigmas = 40.0;
constexpr unsigned kMaxDepth = 30;
constexpr double kRelativeTolerance = 1e-14;

std::pair<double, double> Support(const GaussianMixture1D& a,
                                  const GaussianMixture1D& b) {
  double lo = HUGE_VAL;
  double hi = -HUGE_VAL;
  for (const auto* m : {&a, &b}) {
    for (size_t i = 0; i < m->means.size(); ++i) {
      if (m->weights[i] == 0.0) continue;
      lo = std::min(lo, m->means[i] - kSupportSigmas * m->sigma);
      hi = std::max(hi, m->means[i] + kSupportSigmas * m->sigma);
    }
  }
  return {lo, hi};
}

// Mixture density in extended precision. With small mixing weights p and
// alpha q nearly cancel, and double evaluation leaves noise the error
// estimate cannot get under.
long double DensityLong(const GaussianMixture1D& m, long double x) {
  long double total = 0.0L;
  for (size_t i = 0; i < m.weights.size(); ++i) {
    if (m.weights[i] == 0.0) continue;
    const long double z = (x - m.means[i]) / m.sigma;
    total += m.weights[i] * std::exp(-0.5L * z * z);
  }
  return total / (m.sigma * std::sqrt(2.0L * std::numbers::pi_v<long double>));
}

}  // namespace

absl::StatusOr<double> HockeyStickNumeric(const GaussianMixture1D& numerator,
                                          const GaussianMixture1D& denominator,
                                          Alpha alpha, double tolerance) {
  if (!(tolerance > 0.0)) {
    return absl::InvalidArgumentError("tolerance must be positive");
  }
  const double a = alpha.value();
  if (!std::isfinite(a)) return 0.0;
  auto diff = [&](double x) {
    return static_cast<double>(DensityLong(numerator, x) -
                               static_cast<long double>(a) *
                                   DensityLong(denominator, x));
  };

  const auto [lo, hi] = Support(numerator, denominator);
  // Breakpoints: the support ends plus every sign change of p - alpha q found
  // on a uniform scan and refined by bracketing.
  std::vector<double> breaks = {lo};
  const double step = (hi - lo) / kScanPoints;
  double x_prev = lo;
  double f_prev = diff(lo);
  for (int i = 1; i <= kScanPoints; ++i) {
    const double x = lo + i * step;
    const double f = diff(x);
    if ((f_prev > 0.0) != (f > 0.0) && f_prev != 0.0 && f != 0.0) {
      std::uintmax_t iterations = 200;
      auto [r_lo, r_hi] = boost::math::tools::toms748_solve(
          diff, x_prev, x, f_prev, f,
          boost::math::tools::eps_tolerance<double>(52), iterations);
      breaks.push_back(0.5 * (r_lo + r_hi));
    }
    x_prev = x;
    f_prev = f;
  }
  breaks.push_back(hi);

  auto positive_part = [&](double x) { return std::max(0.0, diff(x)); };
  double total = 0.0;
  double total_error = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double left = breaks[i];
    const double right = breaks[i + 1];
    if (!(right > left)) continue;
    bool any_positive = false;
    for (double t : {0.01, 0.25, 0.5, 0.75, 0.99}) {
      any_positive = any_positive || positive_part(left + t * (right - left)) > 0.0;
    }
    if (!any_positive) continue;
    // Boost terminates on relative error only. A coarse pass gives the piece's
    // L1 norm, which turns a share of the absolute budget into a relative
    // target; otherwise pieces far in the tails recurse to full depth.
    double l1 = 0.0;
    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        positive_part, left, right, 0, 0.0, nullptr, &l1);
    const double budget = 0.01 * tolerance / static_cast<double>(breaks.size());
    const double relative =
        l1 > 0.0 ? std::max(kRelativeTolerance, budget / l1) : 1.0;
    double error = 0.0;
    const double piece =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            positive_part, left, right, kMaxDepth, relative, &error);
    total += piece;
    total_error += error;
  }
  if (!(total_error <= tolerance)) {
    return absl::InternalError(absl::StrFormat(
        "quadrature did not converge: error estimate %g exceeds %g",
        total_error, tolerance));
  }
  return total;
}

}  // namespace patchdp
