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

#include "patchdp/geometry.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "patchdp/integral_image.h"

namespace patchdp {
namespace {

// Number of crop origins along one axis whose window [u, u + crop) touches the
// patch span [start, start + extent), all in padded coordinates.
int64_t AxisFavorable(int64_t padded_length, int64_t crop, int64_t start,
                      int64_t extent) {
  const int64_t lo = std::max<int64_t>(0, start - crop + 1);
  const int64_t hi = std::min(padded_length - crop, start + extent - 1);
  return hi >= lo ? hi - lo + 1 : 0;
}

IntegralImage<int64_t> MaskIntegral(const Mask& mask) {
  return IntegralImage<int64_t>(
      mask.width(), mask.height(),
      [&mask](int64_t x, int64_t y) { return mask.at(x, y) ? 1 : 0; });
}

}  // namespace

absl::Status CropConfig::Validate() const {
  if (image_width < 1 || image_height < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "image size must be at least 1x1, got %dx%d", image_width,
        image_height));
  }
  if (crop_width < 1 || crop_height < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "crop size must be at least 1x1, got %dx%d", crop_width, crop_height));
  }
  if (pad_x < 0 || pad_y < 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("padding must be non-negative, got %d,%d", pad_x,
                        pad_y));
  }
  if (crop_width > padded_width()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "crop width %d exceeds padded image width %d (W_C <= W_I + 2 pad_x)",
        crop_width, padded_width()));
  }
  if (crop_height > padded_height()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "crop height %d exceeds padded image height %d (H_C <= H_I + 2 pad_y)",
        crop_height, padded_height()));
  }
  return absl::OkStatus();
}

absl::StatusOr<OriginSpace> ComputeOriginSpace(const CropConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  return OriginSpace{config.padded_width() - config.crop_width + 1,
                     config.padded_height() - config.crop_height + 1};
}

Mask::Mask(int64_t width, int64_t height, std::vector<uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  count_ = std::count_if(bits_.begin(), bits_.end(),
                         [](uint8_t b) { return b != 0; });
}

absl::StatusOr<Mask> Mask::FromBits(int64_t width, int64_t height,
                                    std::vector<uint8_t> bits) {
  if (width < 1 || height < 1) {
    return absl::InvalidArgumentError("mask must be at least 1x1");
  }
  if (static_cast<int64_t>(bits.size()) != width * height) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "mask buffer has %d entries, expected %d", bits.size(),
        width * height));
  }
  Mask mask(width, height, std::move(bits));
  if (mask.count() == 0) {
    return absl::InvalidArgumentError("mask has no set pixels");
  }
  return mask;
}

absl::StatusOr<Mask> Mask::FromRows(const std::vector<std::string>& rows) {
  std::vector<std::string> cleaned;
  for (const std::string& row : rows) {
    std::string bits;
    for (char c : row) {
      if (c == '0' || c == '1') {
        bits.push_back(c);
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        return absl::InvalidArgumentError(
            absl::StrCat("unexpected character '", std::string(1, c),
                         "' in mask row"));
      }
    }
    if (!bits.empty()) cleaned.push_back(std::move(bits));
  }
  if (cleaned.empty()) return absl::InvalidArgumentError("mask is empty");
  const int64_t width = static_cast<int64_t>(cleaned.front().size());
  const int64_t height = static_cast<int64_t>(cleaned.size());
  std::vector<uint8_t> bits(width * height, 0);
  for (int64_t r = 0; r < height; ++r) {
    if (static_cast<int64_t>(cleaned[r].size()) != width) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "mask row %d has %d columns, expected %d", r, cleaned[r].size(),
          width));
    }
    const int64_t y = height - 1 - r;
    for (int64_t x = 0; x < width; ++x) {
      bits[y * width + x] = cleaned[r][x] == '1' ? 1 : 0;
    }
  }
  return FromBits(width, height, std::move(bits));
}

absl::StatusOr<Mask> Mask::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  // Strip comments up front; both formats use '#'.
  std::vector<std::string> lines;
  {
    std::istringstream lines_in(text);
    std::string line;
    while (std::getline(lines_in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) {
        line.resize(hash);
      }
      lines.push_back(line);
    }
  }

  std::istringstream tokens_in([&lines] {
    std::string joined;
    for (const auto& l : lines) absl::StrAppend(&joined, l, "\n");
    return joined;
  }());
  std::string magic;
  tokens_in >> magic;
  if (magic != "P1") return FromRows(lines);

  int64_t width = 0;
  int64_t height = 0;
  if (!(tokens_in >> width >> height) || width < 1 || height < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad portable bitmap header in ", path));
  }
  std::vector<uint8_t> raster;
  raster.reserve(width * height);
  char c;
  while (tokens_in.get(c) && static_cast<int64_t>(raster.size()) < width * height) {
    if (c == '0' || c == '1') raster.push_back(c == '1' ? 1 : 0);
  }
  if (static_cast<int64_t>(raster.size()) != width * height) {
    return absl::InvalidArgumentError(
        absl::StrCat("truncated portable bitmap ", path));
  }
  std::vector<uint8_t> bits(width * height, 0);
  for (int64_t r = 0; r < height; ++r) {
    for (int64_t x = 0; x < width; ++x) {
      bits[(height - 1 - r) * width + x] = raster[r * width + x];
    }
  }
  return FromBits(width, height, std::move(bits));
}

Mask Mask::SolidRect(int64_t width, int64_t height) {
  return Mask(width, height, std::vector<uint8_t>(width * height, 1));
}

Mask Mask::Disk(int64_t radius) {
  const int64_t side = 2 * radius + 1;
  std::vector<uint8_t> bits(side * side, 0);
  for (int64_t y = 0; y < side; ++y) {
    for (int64_t x = 0; x < side; ++x) {
      const int64_t dx = x - radius;
      const int64_t dy = y - radius;
      bits[y * side + x] = dx * dx + dy * dy <= radius * radius ? 1 : 0;
    }
  }
  return Mask(side, side, std::move(bits));
}

Mask Mask::DiskPair(int64_t radius, int64_t gap) {
  const Mask disk = Disk(radius);
  const int64_t side = disk.width();
  const int64_t width = 2 * side + gap;
  std::vector<uint8_t> bits(width * side, 0);
  for (int64_t y = 0; y < side; ++y) {
    for (int64_t x = 0; x < side; ++x) {
      if (!disk.at(x, y)) continue;
      bits[y * width + x] = 1;
      bits[y * width + x + side + gap] = 1;
    }
  }
  return Mask(width, side, std::move(bits));
}

bool Mask::IsSubsetOf(const Mask& other) const {
  if (width_ != other.width_ || height_ != other.height_) return false;
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

int64_t PatchSpec::width() const {
  if (const auto* rect = std::get_if<RectShape>(&shape)) return rect->width;
  return std::get<Mask>(shape).width();
}

int64_t PatchSpec::height() const {
  if (const auto* rect = std::get_if<RectShape>(&shape)) return rect->height;
  return std::get<Mask>(shape).height();
}

int64_t PatchSpec::pixel_count() const {
  if (const auto* rect = std::get_if<RectShape>(&shape)) {
    return rect->width * rect->height;
  }
  return std::get<Mask>(shape).count();
}

absl::Status ValidatePlacement(const CropConfig& config, int64_t width,
                               int64_t height, const Placement& placement) {
  if (width < 1 || height < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "patch size must be at least 1x1, got %dx%d", width, height));
  }
  if (width > config.image_width || height > config.image_height) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "patch %dx%d does not fit in image %dx%d", width, height,
        config.image_width, config.image_height));
  }
  if (placement.x < 0 || placement.y < 0 ||
      placement.x + width > config.image_width ||
      placement.y + height > config.image_height) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "patch %dx%d at (%d,%d) leaves the original %dx%d image", width,
        height, placement.x, placement.y, config.image_width,
        config.image_height));
  }
  return absl::OkStatus();
}

absl::StatusOr<InclusionProbability> InclusionProbabilityRect(
    const CropConfig& config, const RectShape& patch,
    const Placement& placement) {
  absl::StatusOr<OriginSpace> space = ComputeOriginSpace(config);
  if (!space.ok()) return space.status();
  if (absl::Status s =
          ValidatePlacement(config, patch.width, patch.height, placement);
      !s.ok()) {
    return s;
  }
  const int64_t fx =
      AxisFavorable(config.padded_width(), config.crop_width,
                    placement.x + config.pad_x, patch.width);
  const int64_t fy =
      AxisFavorable(config.padded_height(), config.crop_height,
                    placement.y + config.pad_y, patch.height);
  return InclusionProbability{fx * fy, space->size()};
}

absl::StatusOr<InclusionProbability> InclusionProbabilityMask(
    const CropConfig& config, const Mask& mask, const Placement& placement) {
  absl::StatusOr<OriginSpace> space = ComputeOriginSpace(config);
  if (!space.ok()) return space.status();
  if (mask.count() == 0) {
    return absl::InvalidArgumentError("mask has no set pixels");
  }
  if (absl::Status s =
          ValidatePlacement(config, mask.width(), mask.height(), placement);
      !s.ok()) {
    return s;
  }
  const IntegralImage<int64_t> integral = MaskIntegral(mask);
  // Window [u, u + W_C) in padded coordinates maps to mask column
  // u - (R_x + pad_x).
  const int64_t left = placement.x + config.pad_x;
  const int64_t bottom = placement.y + config.pad_y;
  int64_t favorable = 0;
  for (int64_t v = 0; v < space->height; ++v) {
    const int64_t y0 = v - bottom;
    for (int64_t u = 0; u < space->width; ++u) {
      const int64_t x0 = u - left;
      if (integral.BoxSum(x0, y0, x0 + config.crop_width,
                          y0 + config.crop_height) > 0) {
        ++favorable;
      }
    }
  }
  return InclusionProbability{favorable, space->size()};
}

Placement CenteredPlacement(const CropConfig& config, int64_t width,
                            int64_t height) {
  return Placement{(config.image_width - width) / 2,
                   (config.image_height - height) / 2};
}

namespace {

absl::StatusOr<WorstCaseInclusion> WorstCaseMask(const CropConfig& config,
                                                 const Mask& mask) {
  absl::StatusOr<OriginSpace> space = ComputeOriginSpace(config);
  if (!space.ok()) return space.status();
  if (mask.width() > config.image_width ||
      mask.height() > config.image_height) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "patch %dx%d does not fit in image %dx%d", mask.width(), mask.height(),
        config.image_width, config.image_height));
  }
  const IntegralImage<int64_t> integral = MaskIntegral(mask);

  // Hit set: crop-origin offsets (relative to the mask's bottom-left corner)
  // whose window touches a set pixel. Offset o_x spans
  // [-(W_C - 1), mask_width - 1], stored shifted by W_C - 1.
  const int64_t cw = config.crop_width;
  const int64_t ch = config.crop_height;
  const int64_t hit_w = mask.width() + cw - 1;
  const int64_t hit_h = mask.height() + ch - 1;
  const IntegralImage<int64_t> hits(
      hit_w, hit_h, [&](int64_t dx, int64_t dy) {
        const int64_t ox = dx - (cw - 1);
        const int64_t oy = dy - (ch - 1);
        return integral.BoxSum(ox, oy, ox + cw, oy + ch) > 0 ? 1 : 0;
      });

  WorstCaseInclusion best{InclusionProbability{-1, space->size()}, {0, 0}};
  for (int64_t ry = 0; ry + mask.height() <= config.image_height; ++ry) {
    const int64_t by = ry + config.pad_y;
    const int64_t dy0 = -by + ch - 1;
    for (int64_t rx = 0; rx + mask.width() <= config.image_width; ++rx) {
      const int64_t bx = rx + config.pad_x;
      const int64_t dx0 = -bx + cw - 1;
      const int64_t count =
          hits.BoxSum(dx0, dy0, dx0 + space->width, dy0 + space->height);
      if (count > best.probability.favorable) {
        best.probability.favorable = count;
        best.placement = Placement{rx, ry};
      }
    }
  }
  return best;
}

}  // namespace

absl::StatusOr<WorstCaseInclusion> ComputeWorstCaseInclusion(
    const CropConfig& config, const PatchShape& shape) {
  if (const auto* rect = std::get_if<RectShape>(&shape)) {
    if (rect->width > config.image_width ||
        rect->height > config.image_height) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "patch %dx%d does not fit in image %dx%d", rect->width,
          rect->height, config.image_width, config.image_height));
    }
    const Placement center =
        CenteredPlacement(config, rect->width, rect->height);
    absl::StatusOr<InclusionProbability> p =
        InclusionProbabilityRect(config, *rect, center);
    if (!p.ok()) return p.status();
    return WorstCaseInclusion{*p, center};
  }
  return WorstCaseMask(config, std::get<Mask>(shape));
}

absl::StatusOr<WorstCaseInclusion> ResolveInclusion(const CropConfig& config,
                                                    const PatchSpec& patch) {
  if (!patch.placement.has_value()) {
    return ComputeWorstCaseInclusion(config, patch.shape);
  }
  absl::StatusOr<InclusionProbability> p =
      std::holds_alternative<RectShape>(patch.shape)
          ? InclusionProbabilityRect(config, std::get<RectShape>(patch.shape),
                                     *patch.placement)
          : InclusionProbabilityMask(config, std::get<Mask>(patch.shape),
                                     *patch.placement);
  if (!p.ok()) return p.status();
  return WorstCaseInclusion{*p, *patch.placement};
}

absl::StatusOr<double> EffectiveRate(double gamma_wo, double gamma_crop) {
  if (!(gamma_wo >= 0.0 && gamma_wo <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma_wo must lie in [0, 1], got %g", gamma_wo));
  }
  if (!(gamma_crop >= 0.0 && gamma_crop <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma_crop must lie in [0, 1], got %g", gamma_crop));
  }
  return gamma_wo * gamma_crop;
}

}  // namespace patchdp
