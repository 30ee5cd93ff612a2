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

// Minimal polyline charts for eyeballing CSV outputs.

#ifndef PATCHDP_CLI_SVG_H_
#define PATCHDP_CLI_SVG_H_

#include <string>
#include <vector>

namespace patchdp::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  // Points with y <= 0 are dropped on a log axis.
  bool log_y = false;
};

std::string RenderLineChart(const std::vector<Series>& series,
                            const ChartOptions& options);

}  // namespace patchdp::cli

#endif  // PATCHDP_CLI_SVG_H_
