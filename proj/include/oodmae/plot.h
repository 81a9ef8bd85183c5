// Copyright 2026 The oodmae Authors.
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

#ifndef OODMAE_PLOT_H_
#define OODMAE_PLOT_H_

#include <filesystem>
#include <string>
#include <vector>

namespace oodmae {

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // one value per x
};

struct LineChart {
  std::string title;
  std::vector<double> x;
  std::vector<PlotSeries> series;
  double y_min = 0.0;
  double y_max = 1.0;
  int width = 640;
  int height = 420;
};

// Renders axes, ticks, one coloured polyline with point markers per series
// and a legend, all with a small built-in bitmap font. Labels are drawn
// upper-cased; characters outside [A-Z0-9 .,_:=+-] render as blanks.
void WriteLineChartPng(const std::filesystem::path& path,
                       const LineChart& chart);

}  // namespace oodmae

#endif  // OODMAE_PLOT_H_
