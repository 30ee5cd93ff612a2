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

#include "cli/svg.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"

namespace patchdp::cli {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string Escape(const std::string& text) {
  return absl::StrReplaceAll(
      text, {{"&", "&amp;"}, {"<", "&lt;"}, {">", "&gt;"}, {"\"", "&quot;"}});
}

}  // namespace

std::string RenderLineChart(const std::vector<Series>& series,
                            const ChartOptions& options) {
  auto transform_y = [&](double y) {
    return options.log_y ? std::log10(y) : y;
  };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!options.log_y || y > 0.0);
  };

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const Series& s : series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, transform_y(s.y[i]));
      y_max = std::max(y_max, transform_y(s.y[i]));
    }
  }
  if (!(x_max >= x_min)) x_min = 0, x_max = 1;
  if (!(y_max >= y_min)) y_min = 0, y_max = 1;
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) {
    return kTop + (1.0 - (transform_y(y) - y_min) / (y_max - y_min)) * plot_h;
  };

  std::string svg = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n"
      "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kWidth, kHeight, kLeft, kTop, plot_w, plot_h);
  absl::StrAppendFormat(&svg,
                        "<text x=\"%g\" y=\"24\" text-anchor=\"middle\" "
                        "font-size=\"14\">%s</text>\n",
                        kLeft + plot_w / 2, Escape(options.title));
  absl::StrAppendFormat(&svg,
                        "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n",
                        kLeft + plot_w / 2, kHeight - 15, Escape(options.x_label));
  absl::StrAppendFormat(
      &svg,
      "<text x=\"18\" y=\"%g\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 %g)\">%s</text>\n",
      kTop + plot_h / 2, kTop + plot_h / 2,
      Escape(options.y_label + (options.log_y ? " (log10)" : "")));

  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4;
    const double fy = y_min + (y_max - y_min) * t / 4;
    const double sx = kLeft + plot_w * t / 4;
    const double sy = kTop + plot_h * (1.0 - t / 4.0);
    absl::StrAppendFormat(&svg,
                          "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.4g</text>\n",
                          sx, kTop + plot_h + 18, fx);
    absl::StrAppendFormat(&svg,
                          "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.4g</text>\n",
                          kLeft - 6, sy + 4, fy);
  }

  for (size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      absl::StrAppendFormat(&points, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
    }
    absl::StrAppendFormat(&svg,
                          "<polyline fill=\"none\" stroke=\"%s\" "
                          "stroke-width=\"1.5\" points=\"%s\"/>\n",
                          color, points);
    const double ly = kTop + 16 + 18 * static_cast<double>(k);
    absl::StrAppendFormat(&svg,
                          "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                          "stroke=\"%s\" stroke-width=\"2\"/>\n"
                          "<text x=\"%g\" y=\"%g\">%s</text>\n",
                          kLeft + plot_w + 10, ly, kLeft + plot_w + 30, ly, color,
                          kLeft + plot_w + 36, ly + 4, Escape(s.name));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace patchdp::cli
