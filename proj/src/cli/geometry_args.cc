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

#include "cli/geometry_args.h"

#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace patchdp::cli {
namespace {

absl::StatusOr<std::pair<int64_t, int64_t>> ParseTwo(const std::string& text,
                                                     char separator,
                                                     absl::string_view what) {
  std::vector<std::string> parts =
      absl::StrSplit(text, absl::MaxSplits(separator, 1));
  int64_t a = 0;
  int64_t b = 0;
  if (parts.size() != 2 || !absl::SimpleAtoi(parts[0], &a) ||
      !absl::SimpleAtoi(parts[1], &b)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot parse %s '%s', expected A%cB with integers", what, text,
        separator));
  }
  return std::make_pair(a, b);
}

}  // namespace

absl::StatusOr<std::pair<int64_t, int64_t>> ParseSize(const std::string& text) {
  return ParseTwo(text, 'x', "size");
}

absl::StatusOr<std::pair<int64_t, int64_t>> ParsePair(const std::string& text) {
  return ParseTwo(text, ',', "pair");
}

absl::StatusOr<PatchShape> ParsePatchShape(const std::string& text) {
  absl::string_view rest = text;
  if (absl::ConsumePrefix(&rest, "rect:")) {
    absl::StatusOr<std::pair<int64_t, int64_t>> size =
        ParseSize(std::string(rest));
    if (!size.ok()) return size.status();
    if (size->first < 1 || size->second < 1) {
      return absl::InvalidArgumentError(
          "patch width and height must be at least 1");
    }
    return RectShape{size->first, size->second};
  }
  if (absl::ConsumePrefix(&rest, "mask:")) {
    absl::StatusOr<Mask> mask = Mask::FromFile(std::string(rest));
    if (!mask.ok()) return mask.status();
    return *std::move(mask);
  }
  if (absl::ConsumePrefix(&rest, "disk:")) {
    int64_t radius = 0;
    if (!absl::SimpleAtoi(rest, &radius) || radius < 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("bad disk radius in '%s'", text));
    }
    return Mask::Disk(radius);
  }
  if (absl::ConsumePrefix(&rest, "disks:")) {
    absl::StatusOr<std::pair<int64_t, int64_t>> pair =
        ParsePair(std::string(rest));
    if (!pair.ok()) return pair.status();
    if (pair->first < 0 || pair->second < 0) {
      return absl::InvalidArgumentError(
          "disk radius and gap must be non-negative");
    }
    return Mask::DiskPair(pair->first, pair->second);
  }
  return absl::InvalidArgumentError(absl::StrFormat(
      "unknown patch '%s'; use rect:WxH, mask:FILE, disk:R or disks:R,GAP",
      text));
}

absl::StatusOr<std::vector<double>> ParseRealList(const std::string& text) {
  std::vector<double> values;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    double v = 0.0;
    if (!absl::SimpleAtod(absl::StripAsciiWhitespace(part), &v)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("cannot parse number '%s' in list '%s'", part, text));
    }
    values.push_back(v);
  }
  if (values.empty()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("empty number list '%s'", text));
  }
  return values;
}

}  // namespace patchdp::cli
