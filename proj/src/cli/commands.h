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
// Command-line front end: gamma, profile, sweep and calibrate.

#ifndef PATCHDP_CLI_COMMANDS_H_
#define PATCHDP_CLI_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace patchdp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitOutOfRange = 3;
inline constexpr int kExitInternal = 1;

// Environment variable holding the default output directory.
inline constexpr char kOutputDirEnv[] = "PATCHDP_OUTPUT_DIR";

// Runs the CLI on `args` (without the program name) and returns the exit
// code: 0 on success, 2 for invalid input or configuration, 3 when a noise
// calibration cannot be bracketed.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace patchdp::cli

#endif  // PATCHDP_CLI_COMMANDS_H_
