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

// Run manifests: a JSON record next to every output set.

#ifndef PATCHDP_CLI_MANIFEST_H_
#define PATCHDP_CLI_MANIFEST_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"

namespace patchdp::cli {

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  // Resolved options in the --config file format.
  std::string resolved_config;
  // Derived quantities worth recording, in insertion order.
  std::vector<std::pair<std::string, std::string>> derived;
  std::vector<uint64_t> seeds;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

// Serializes the manifest. Key order is fixed.
std::string ManifestJson(const RunManifest& manifest);

// Writes `contents` to `path`, creating parent directories.
absl::Status WriteTextFile(const std::string& path,
                           const std::string& contents);

}  // namespace patchdp::cli

#endif  // PATCHDP_CLI_MANIFEST_H_
