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

#ifndef PATCHDP_SPECIAL_FUNCTIONS_H_
#define PATCHDP_SPECIAL_FUNCTIONS_H_

namespace patchdp {

// Standard normal CDF. Evaluated through erfc on the side that avoids
// cancellation, so both tails keep full relative precision.
double NormalCdf(double x);

// Standard normal survival function 1 - NormalCdf(x), accurate in the upper
// tail.
double NormalSf(double x);

// Standard normal density.
double NormalPdf(double x);

}  // namespace patchdp

#endif  // PATCHDP_SPECIAL_FUNCTIONS_H_
