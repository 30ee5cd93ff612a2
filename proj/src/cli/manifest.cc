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

#include "cli/manifest.h"

#include <filesystem>
#include <fstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"

#ifndef PATCHDP_VERSION
#define PATCHDP_VERSION "unknown"
#endif

namespace patchdp::cli {

std::string ManifestJson(const RunManifest& manifest) {
  nlohmann::ordered_json json;
  json["tool"] = "patchdp";
  json["version"] = PATCHDP_VERSION;
  json["command"] = manifest.command;
  json["argv"] = manifest.argv;
  json["config"] = manifest.resolved_config;
  nlohmann::ordered_json derived = nlohmann::ordered_json::object();
  for (const auto& [key, value] : manifest.derived) derived[key] = value;
  json["derived"] = derived;
  json["seeds"] = manifest.seeds;
  json["outputs"] = manifest.outputs;
  json["wall_seconds"] = manifest.wall_seconds;
  return json.dump(2) + "\n";
}

absl::Status WriteTextFile(const std::string& path,
                           const std::string& contents) {
  std::error_code error;
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::filesystem::create_directories(target.parent_path(), error);
    if (error) {
      return absl::NotFoundError(absl::StrCat("cannot create directory ",
                                              target.parent_path().string(),
                                              ": ", error.message()));
    }
  }
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  out << contents;
  out.close();
  if (!out) return absl::NotFoundError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

}  // namespace patchdp::cli
