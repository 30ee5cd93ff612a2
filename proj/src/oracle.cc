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

#include "patchdp/oracle.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

#include "absl/strings/str_format.h"

namespace patchdp {
namespace {

constexpr int64_t kChunkSize = int64_t{1} << 16;
constexpr int64_t kMinSamples = 1000;

uint64_t Mix(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Rect {
  int64_t x0, y0, x1, y1;  // Half-open, padded coordinates.
};

bool Overlaps(const Rect& a, const Rect& b) {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

// One flag per crop origin, row-major over (v, u): does the crop window meet
// the patch. Literal per-origin tests.
absl::StatusOr<std::vector<uint8_t>> HitTable(const CropConfig& config,
                                              const PatchSpec& patch,
                                              OriginSpace* space) {
  absl::StatusOr<OriginSpace> omega = ComputeOriginSpace(config);
  if (!omega.ok()) return omega.status();
  if (omega->size() > kMaxEnumeratedOrigins) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "origin space has %d origins, more than the enumeration limit %d",
        omega->size(), kMaxEnumeratedOrigins));
  }
  Placement at;
  if (patch.placement.has_value()) {
    at = *patch.placement;
  } else if (std::holds_alternative<RectShape>(patch.shape)) {
    at = CenteredPlacement(config, patch.width(), patch.height());
  } else {
    return absl::InvalidArgumentError(
        "mask enumeration needs an explicit placement");
  }
  if (absl::Status s =
          ValidatePlacement(config, patch.width(), patch.height(), at);
      !s.ok()) {
    return s;
  }
  const int64_t px = at.x + config.pad_x;
  const int64_t py = at.y + config.pad_y;

  // Private pixels as unit rectangles; a rectangle patch is a single one.
  std::vector<Rect> pieces;
  if (std::holds_alternative<RectShape>(patch.shape)) {
    pieces.push_back({px, py, px + patch.width(), py + patch.height()});
  } else {
    const Mask& mask = std::get<Mask>(patch.shape);
    if (mask.count() == 0) {
      return absl::InvalidArgumentError("mask has no set pixels");
    }
    for (int64_t y = 0; y < mask.height(); ++y) {
      for (int64_t x = 0; x < mask.width(); ++x) {
        if (mask.at(x, y)) pieces.push_back({px + x, py + y, px + x + 1, py + y + 1});
      }
    }
  }

  std::vector<uint8_t> hits(static_cast<size_t>(omega->size()), 0);
  for (int64_t v = 0; v < omega->height; ++v) {
    for (int64_t u = 0; u < omega->width; ++u) {
      const Rect crop{u, v, u + config.crop_width, v + config.crop_height};
      bool hit = false;
      for (const Rect& piece : pieces) {
        if (Overlaps(crop, piece)) {
          hit = true;
          break;
        }
      }
      hits[static_cast<size_t>(v * omega->width + u)] = hit;
    }
  }
  *space = *omega;
  return hits;
}

double LogTerm(const GaussianMixture1D& m, size_t i, double x) {
  if (!(m.weights[i] > 0.0)) return -HUGE_VAL;
  const double z = (x - m.means[i]) / m.sigma;
  return std::log(m.weights[i]) - 0.5 * z * z;
}

double LogDensity(const GaussianMixture1D& m, double x) {
  double peak = -HUGE_VAL;
  for (size_t i = 0; i < m.means.size(); ++i) {
    peak = std::max(peak, LogTerm(m, i, x));
  }
  double sum = 0.0;
  for (size_t i = 0; i < m.means.size(); ++i) {
    sum += std::exp(LogTerm(m, i, x) - peak);
  }
  return peak + std::log(sum) - std::log(m.sigma * std::sqrt(2 * std::numbers::pi));
}

double Sample(const GaussianMixture1D& m, CounterRng& rng) {
  const double u = rng.Uniform();
  double cumulative = 0.0;
  size_t k = m.means.size() - 1;
  for (size_t i = 0; i < m.means.size(); ++i) {
    cumulative += m.weights[i];
    if (u < cumulative) {
      k = i;
      break;
    }
  }
  return m.means[k] + m.sigma * rng.Normal();
}

// max(0, 1 - alpha * e^{log_ratio}) with alpha = e^{log_alpha}.
double HockeyTerm(double log_alpha, double log_ratio) {
  const double t = log_alpha + log_ratio;
  if (t >= 0.0) return 0.0;
  return -std::expm1(t);
}

struct ChunkSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Runs `draw(rng)` `samples` times over fixed-size chunks, one stream per
// chunk, and reduces the chunk sums in chunk order.
template <typename Draw>
McEstimate RunChunks(int64_t samples, uint64_t seed, const Draw& draw) {
  const int64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkSums> sums(static_cast<size_t>(chunks));
  auto run = [&](int64_t c) {
    CounterRng rng(seed, static_cast<uint64_t>(c));
    const int64_t n = std::min(kChunkSize, samples - c * kChunkSize);
    ChunkSums s;
    for (int64_t i = 0; i < n; ++i) {
      const double v = draw(rng);
      s.sum += v;
      s.sum_sq += v * v;
    }
    sums[static_cast<size_t>(c)] = s;
  };
  const int64_t workers = std::min<int64_t>(
      chunks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (int64_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::vector<std::thread> threads;
    for (int64_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (int64_t c = w; c < chunks; c += workers) run(c);
      });
    }
    for (auto& t : threads) t.join();
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const ChunkSums& s : sums) {
    sum += s.sum;
    sum_sq += s.sum_sq;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double variance =
      std::max(0.0, (sum_sq - n * mean * mean) / std::max(1.0, n - 1.0));
  return McEstimate{mean, std::sqrt(variance / n), samples};
}

absl::Status CheckSamples(int64_t samples) {
  if (samples < kMinSamples) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Monte Carlo needs at least %d samples, got %d", kMinSamples, samples));
  }
  return absl::OkStatus();
}

}  // namespace

uint64_t CounterRng::NextU64() {
  const uint64_t key = Mix(seed_ ^ Mix(stream_ + 0x632BE59BD9B4E019ULL));
  return Mix(key + 0xD1B54A32D192ED03ULL * ++counter_);
}

double CounterRng::Uniform() {
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(Uniform()));
  const double theta = 2.0 * std::numbers::pi * Uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

absl::StatusOr<InclusionProbability> EnumerateInclusion(
    const CropConfig& config, const PatchSpec& patch) {
  OriginSpace space;
  absl::StatusOr<std::vector<uint8_t>> hits = HitTable(config, patch, &space);
  if (!hits.ok()) return hits.status();
  const int64_t favorable = std::count(hits->begin(), hits->end(), 1);
  return InclusionProbability{favorable, space.size()};
}

absl::StatusOr<McEstimate> McHockeyStick(const SubsampledPair& pair,
                                         Alpha alpha, int64_t samples,
                                         uint64_t seed) {
  return McHockeyStick(
      pair, alpha.epsilon() >= 0.0 ? Direction::kForward : Direction::kReverse,
      alpha, samples, seed);
}

absl::StatusOr<McEstimate> McHockeyStick(const SubsampledPair& pair,
                                         Direction direction, Alpha alpha,
                                         int64_t samples, uint64_t seed) {
  if (absl::Status s = pair.Validate(); !s.ok()) return s;
  if (absl::Status s = CheckSamples(samples); !s.ok()) return s;
  const MixturePair mixtures = MixturesFor(pair, direction);
  const double log_alpha = alpha.epsilon();
  return RunChunks(samples, seed, [&](CounterRng& rng) {
    const double x = Sample(mixtures.numerator, rng);
    return HockeyTerm(log_alpha, LogDensity(mixtures.denominator, x) -
                                     LogDensity(mixtures.numerator, x));
  });
}

absl::StatusOr<McEstimate> WorstCaseMechanismDivergence(
    double gamma_wo, const CropConfig& config, const PatchSpec& patch,
    double sigma, double epsilon, int64_t samples, uint64_t seed,
    double clipping_norm) {
  return WorstCaseMechanismDivergence(
      gamma_wo, config, patch, sigma,
      epsilon >= 0.0 ? Direction::kForward : Direction::kReverse, epsilon,
      samples, seed, clipping_norm);
}

absl::StatusOr<McEstimate> WorstCaseMechanismDivergence(
    double gamma_wo, const CropConfig& config, const PatchSpec& patch,
    double sigma, Direction direction, double epsilon, int64_t samples,
    uint64_t seed, double clipping_norm) {
  if (!(gamma_wo >= 0.0 && gamma_wo <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma_wo must lie in [0, 1], got %g", gamma_wo));
  }
  if (!(sigma > 0.0) || !(clipping_norm > 0.0)) {
    return absl::InvalidArgumentError(
        "sigma and clipping norm must be positive");
  }
  if (absl::Status s = CheckSamples(samples); !s.ok()) return s;
  OriginSpace space;
  absl::StatusOr<std::vector<uint8_t>> hits = HitTable(config, patch, &space);
  if (!hits.ok()) return hits.status();

  // Exact output densities of the simulated step. With the patch the output
  // is a two-component mixture at -kappa and +kappa; without it, -kappa only.
  const int64_t favorable = std::count(hits->begin(), hits->end(), 1);
  const double gamma =
      gamma_wo * static_cast<double>(favorable) / static_cast<double>(space.size());
  const double kappa = clipping_norm;
  const double scale = sigma * kappa;
  auto log_with = [&](double o) {
    const double a = (o + kappa) / scale;
    const double b = (o - kappa) / scale;
    const double la = std::log1p(-gamma) - 0.5 * a * a;
    const double lb = gamma > 0.0 ? std::log(gamma) - 0.5 * b * b : -HUGE_VAL;
    const double peak = std::max(la, lb);
    return peak + std::log(std::exp(la - peak) + std::exp(lb - peak));
  };
  auto log_without = [&](double o) {
    const double a = (o + kappa) / scale;
    return -0.5 * a * a;
  };

  const bool with_first = direction == Direction::kForward;
  const std::vector<uint8_t>& table = *hits;
  return RunChunks(samples, seed, [&](CounterRng& rng) {
    double gradient = -kappa;
    if (with_first) {
      const bool selected = rng.Uniform() < gamma_wo;
      const auto u = static_cast<int64_t>(rng.Uniform() * space.width);
      const auto v = static_cast<int64_t>(rng.Uniform() * space.height);
      if (selected && table[static_cast<size_t>(v * space.width + u)]) {
        gradient = kappa;
      }
    }
    const double o = gradient + scale * rng.Normal();
    const double log_ratio = with_first ? log_without(o) - log_with(o)
                                        : log_with(o) - log_without(o);
    return HockeyTerm(epsilon, log_ratio);
  });
}

}  // namespace patchdp
