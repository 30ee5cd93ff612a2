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

#ifndef PATCHDP_INTEGRAL_IMAGE_H_
#define PATCHDP_INTEGRAL_IMAGE_H_

#include <algorithm>
#include <cstdint>
#include <vector>

namespace patchdp {

// Summed-area table over a width x height grid. Stores one extra row and
// column of zeros so box queries need no boundary branches.
template <typename Sum = int64_t>
class IntegralImage {
 public:
  IntegralImage() = default;

  // `value(x, y)` is called once per cell.
  template <typename Fn>
  IntegralImage(int64_t width, int64_t height, Fn&& value)
      : width_(width),
        height_(height),
        table_((width + 1) * (height + 1), Sum{0}) {
    for (int64_t y = 0; y < height; ++y) {
      Sum row = 0;
      for (int64_t x = 0; x < width; ++x) {
        row += static_cast<Sum>(value(x, y));
        table_[(y + 1) * (width + 1) + (x + 1)] =
            table_[y * (width + 1) + (x + 1)] + row;
      }
    }
  }

  int64_t width() const { return width_; }
  int64_t height() const { return height_; }

  // Sum over the half-open box [x0, x1) x [y0, y1), clipped to the grid.
  Sum BoxSum(int64_t x0, int64_t y0, int64_t x1, int64_t y1) const {
    x0 = std::clamp<int64_t>(x0, 0, width_);
    x1 = std::clamp<int64_t>(x1, 0, width_);
    y0 = std::clamp<int64_t>(y0, 0, height_);
    y1 = std::clamp<int64_t>(y1, 0, height_);
    if (x0 >= x1 || y0 >= y1) return Sum{0};
    const int64_t stride = width_ + 1;
    return table_[y1 * stride + x1] - table_[y0 * stride + x1] -
           table_[y1 * stride + x0] + table_[y0 * stride + x0];
  }

 private:
  int64_t width_ = 0;
  int64_t height_ = 0;
  std::vector<Sum> table_;
};

}  // namespace patchdp

#endif  // PATCHDP_INTEGRAL_IMAGE_H_
