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

#ifndef PATCHDP_CLI_GEOMETRY_ARGS_H_
#define PATCHDP_CLI_GEOMETRY_ARGS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "patchdp/geometry.h"

namespace patchdp::cli {

// "WxH", e.g. "1000x1000".
absl::StatusOr<std::pair<int64_t, int64_t>> ParseSize(const std::string& text);

// "X,Y", e.g. "0,0".
absl::StatusOr<std::pair<int64_t, int64_t>> ParsePair(const std::string& text);

// Patch shapes:
//   rect:WxH          axis-aligned rectangle
//   mask:FILE         plain 0/1 rows or ASCII PBM (P1)
//   disk:R            filled disk of radius R
//   disks:R,GAP       two disks of radius R separated by GAP empty columns
absl::StatusOr<PatchShape> ParsePatchShape(const std::string& text);

// Comma-separated list of reals, e.g. "4,4.5,5".
absl::StatusOr<std::vector<double>> ParseRealList(const std::string& text);

}  // namespace patchdp::cli

#endif  // PATCHDP_CLI_GEOMETRY_ARGS_H_
