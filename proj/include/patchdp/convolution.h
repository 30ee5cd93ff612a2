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

#ifndef PATCHDP_CONVOLUTION_H_
#define PATCHDP_CONVOLUTION_H_

#include <span>
#include <vector>

namespace patchdp {

// Full linear convolution, O(|a| |b|).
std::vector<double> ConvolveDirect(std::span<const double> a,
                                   std::span<const double> b);

// Full linear convolution through a real-to-complex FFT. Entries carry an
// absolute error of roughly 1e-16 times the largest input mass, so results
// can be slightly negative; callers clamp.
std::vector<double> ConvolveFft(std::span<const double> a,
                                std::span<const double> b);

}  // namespace patchdp

#endif  // PATCHDP_CONVOLUTION_H_
