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

#ifndef PATCHDP_GEOMETRY_H_
#define PATCHDP_GEOMETRY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace patchdp {

// Image, padding and crop dimensions. Coordinates follow a bottom-left origin;
// x runs along the width and y along the height. All crop origins are taken in
// the symmetrically padded image.
struct CropConfig {
  int64_t image_width = 0;
  int64_t image_height = 0;
  int64_t pad_x = 0;
  int64_t pad_y = 0;
  int64_t crop_width = 0;
  int64_t crop_height = 0;

  int64_t padded_width() const { return image_width + 2 * pad_x; }
  int64_t padded_height() const { return image_height + 2 * pad_y; }

  // Returns InvalidArgument naming the first violated invariant.
  absl::Status Validate() const;
};

// Number of valid horizontal and vertical crop origins.
struct OriginSpace {
  int64_t width = 0;
  int64_t height = 0;

  int64_t size() const { return width * height; }
};

absl::StatusOr<OriginSpace> ComputeOriginSpace(const CropConfig& config);

// Bottom-left corner of a patch in original (unpadded) image coordinates.
struct Placement {
  int64_t x = 0;
  int64_t y = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct RectShape {
  int64_t width = 0;
  int64_t height = 0;
};

// A binary region over its own bounding box. Bit (x, y) uses the same
// bottom-left convention as images, so text rows are stored top row first and
// flipped on load.
class Mask {
 public:
  // Builds a mask from rows of '0'/'1' characters, top row first. Whitespace
  // inside a row is ignored. Rows must have equal length.
  static absl::StatusOr<Mask> FromRows(const std::vector<std::string>& rows);

  // Reads a plain-text bitmap (rows of 0/1) or an ASCII portable bitmap (P1).
  static absl::StatusOr<Mask> FromFile(const std::string& path);

  // Builds a mask directly from a width x height bit buffer indexed
  // y * width + x.
  static absl::StatusOr<Mask> FromBits(int64_t width, int64_t height,
                                       std::vector<uint8_t> bits);

  static Mask SolidRect(int64_t width, int64_t height);
  static Mask Disk(int64_t radius);
  // Two disks of equal radius side by side, separated by `gap` empty columns.
  static Mask DiskPair(int64_t radius, int64_t gap);

  int64_t width() const { return width_; }
  int64_t height() const { return height_; }
  bool at(int64_t x, int64_t y) const { return bits_[y * width_ + x] != 0; }
  int64_t count() const { return count_; }
  const std::vector<uint8_t>& bits() const { return bits_; }

  // True when `other` has a set bit wherever this mask does (same size).
  bool IsSubsetOf(const Mask& other) const;

 private:
  Mask(int64_t width, int64_t height, std::vector<uint8_t> bits);

  int64_t width_;
  int64_t height_;
  std::vector<uint8_t> bits_;
  int64_t count_;
};

using PatchShape = std::variant<RectShape, Mask>;

// A private region. An empty `placement` requests the worst-case placement.
struct PatchSpec {
  PatchShape shape;
  std::optional<Placement> placement;

  int64_t width() const;
  int64_t height() const;
  // Number of private pixels (full rectangle area for RectShape).
  int64_t pixel_count() const;
};

// Exact ratio of intersecting crop origins to all crop origins.
struct InclusionProbability {
  int64_t favorable = 0;
  int64_t total = 1;

  double value() const {
    return static_cast<double>(favorable) / static_cast<double>(total);
  }
  bool is_one() const { return favorable == total; }

  friend bool operator==(const InclusionProbability&,
                         const InclusionProbability&) = default;
};

struct WorstCaseInclusion {
  InclusionProbability probability;
  Placement placement;
};

// Checks that a shape of the given size placed at `placement` lies fully in the
// original image.
absl::Status ValidatePlacement(const CropConfig& config, int64_t width,
                               int64_t height, const Placement& placement);

absl::StatusOr<InclusionProbability> InclusionProbabilityRect(
    const CropConfig& config, const RectShape& patch,
    const Placement& placement);

// Scans every crop origin and tests the crop window against the mask with a
// 2-D prefix-sum query.
absl::StatusOr<InclusionProbability> InclusionProbabilityMask(
    const CropConfig& config, const Mask& mask, const Placement& placement);

// Centered placement for a rectangle: floor((W_I - W_R) / 2),
// floor((H_I - H_R) / 2).
Placement CenteredPlacement(const CropConfig& config, int64_t width,
                            int64_t height);

// Rectangles use the centered placement. Masks are searched exhaustively over
// every translation that keeps the bounding box inside the image; ties go to
// the smallest (y, x).
absl::StatusOr<WorstCaseInclusion> ComputeWorstCaseInclusion(
    const CropConfig& config, const PatchShape& shape);

// Inclusion probability at the patch's own placement, or the worst case when
// no placement is given.
absl::StatusOr<WorstCaseInclusion> ResolveInclusion(const CropConfig& config,
                                                    const PatchSpec& patch);

// gamma_eff = gamma_wo * gamma_crop.
absl::StatusOr<double> EffectiveRate(double gamma_wo, double gamma_crop);

}  // namespace patchdp

#endif  // PATCHDP_GEOMETRY_H_
