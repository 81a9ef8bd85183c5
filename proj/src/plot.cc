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

#include "oodmae/plot.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "oodmae/error.h"
#include "oodmae/image.h"

namespace oodmae {

namespace {

using Rgb = std::array<uint8_t, 3>;

constexpr Rgb kPalette[] = {
    {31, 119, 180},  {214, 39, 40},  {44, 160, 44},
    {148, 103, 189}, {255, 127, 14}, {23, 190, 207},
};

// 3x5 glyphs, rows top to bottom.
const std::map<char, const char*>& Glyphs() {
  static const std::map<char, const char*> glyphs = {
      {'0', "111101101101111"}, {'1', "010110010010111"},
      {'2', "111001111100111"}, {'3', "111001111001111"},
      {'4', "101101111001001"}, {'5', "111100111001111"},
      {'6', "111100111101111"}, {'7', "111001001001001"},
      {'8', "111101111101111"}, {'9', "111101111001111"},
      {'A', "010101111101101"}, {'B', "110101110101110"},
      {'C', "011100100100011"}, {'D', "110101101101110"},
      {'E', "111100110100111"}, {'F', "111100110100100"},
      {'G', "011100101101011"}, {'H', "101101111101101"},
      {'I', "111010010010111"}, {'J', "001001001101010"},
      {'K', "101101110101101"}, {'L', "100100100100111"},
      {'M', "101111111101101"}, {'N', "110101101101101"},
      {'O', "010101101101010"}, {'P', "110101110100100"},
      {'Q', "010101101110011"}, {'R', "110101110101101"},
      {'S', "011100010001110"}, {'T', "111010010010010"},
      {'U', "101101101101111"}, {'V', "101101101101010"},
      {'W', "101101111111101"}, {'X', "101101010101101"},
      {'Y', "101101010010010"}, {'Z', "111001010100111"},
      {'.', "000000000000010"}, {',', "000000000010100"},
      {'_', "000000000000111"}, {':', "000010000010000"},
      {'=', "000111000111000"}, {'+', "000010111010000"},
      {'-', "000000111000000"},
  };
  return glyphs;
}

class Canvas {
 public:
  Canvas(int w, int h)
      : w_(w), h_(h), px_(static_cast<size_t>(w) * h * 3, 255) {}

  void Set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    uint8_t* p = &px_[(static_cast<size_t>(y) * w_ + x) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void Fill(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) Set(x, y, c);
    }
  }

  void Line(int x0, int y0, int x1, int y1, Rgb c, int thickness = 1) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    const int lo = -(thickness - 1) / 2, hi = thickness / 2;
    while (true) {
      Fill(x0 + lo, y0 + lo, x0 + hi, y0 + hi, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  // Returns the pixel width of the rendered text.
  int Text(int x, int y, const std::string& s, Rgb c, int scale = 2) {
    int cx = x;
    for (char ch : s) {
      const auto it = Glyphs().find(
          static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
      if (it != Glyphs().end()) {
        for (int r = 0; r < 5; ++r) {
          for (int col = 0; col < 3; ++col) {
            if (it->second[r * 3 + col] == '1') {
              Fill(cx + col * scale, y + r * scale,
                   cx + col * scale + scale - 1, y + r * scale + scale - 1, c);
            }
          }
        }
      }
      cx += 4 * scale;
    }
    return cx - x;
  }

  static int TextWidth(const std::string& s, int scale = 2) {
    return static_cast<int>(s.size()) * 4 * scale;
  }

  Pixels8 Pixels() const { return Pixels8{3, h_, w_, px_}; }

 private:
  int w_, h_;
  std::vector<uint8_t> px_;
};

std::string Format(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

void WriteLineChartPng(const std::filesystem::path& path,
                       const LineChart& chart) {
  if (chart.x.empty()) throw ValueError("line chart needs at least one x");
  for (const PlotSeries& s : chart.series) {
    if (s.y.size() != chart.x.size()) {
      throw ShapeError("series '" + s.label + "' length differs from x");
    }
  }
  if (!(chart.y_max > chart.y_min)) throw ValueError("empty y range");

  constexpr Rgb kBlack{0, 0, 0};
  constexpr Rgb kGrid{225, 225, 225};
  const int left = 56, right = 150, top = 34, bottom = 40;
  const int pw = chart.width - left - right;
  const int ph = chart.height - top - bottom;
  if (pw < 20 || ph < 20) throw ValueError("chart too small");
  Canvas canvas(chart.width, chart.height);

  const double x_lo = *std::min_element(chart.x.begin(), chart.x.end());
  const double x_hi = *std::max_element(chart.x.begin(), chart.x.end());
  const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
  auto to_px = [&](double x) {
    const double u = chart.x.size() == 1 ? 0.5 : (x - x_lo) / x_span;
    return left + static_cast<int>(std::lround(u * pw));
  };
  auto to_py = [&](double y) {
    const double v =
        std::clamp((y - chart.y_min) / (chart.y_max - chart.y_min), 0.0, 1.0);
    return top + ph - static_cast<int>(std::lround(v * ph));
  };

  constexpr int kYTicks = 5;
  for (int i = 0; i <= kYTicks; ++i) {
    const double y = chart.y_min + (chart.y_max - chart.y_min) * i / kYTicks;
    const int py = to_py(y);
    canvas.Line(left, py, left + pw, py, kGrid);
    canvas.Line(left - 4, py, left, py, kBlack);
    const std::string label = Format(y, 2);
    canvas.Text(left - 8 - Canvas::TextWidth(label), py - 5, label, kBlack);
  }
  for (double x : chart.x) {
    const int px = to_px(x);
    canvas.Line(px, top + ph, px, top + ph + 4, kBlack);
    const std::string label = Format(x, 2);
    canvas.Text(px - Canvas::TextWidth(label) / 2, top + ph + 10, label,
                kBlack);
  }
  canvas.Line(left, top, left, top + ph, kBlack);
  canvas.Line(left, top + ph, left + pw, top + ph, kBlack);
  canvas.Text(left, 10, chart.title, kBlack);

  for (size_t s = 0; s < chart.series.size(); ++s) {
    const Rgb color = kPalette[s % std::size(kPalette)];
    const PlotSeries& series = chart.series[s];
    for (size_t i = 0; i < chart.x.size(); ++i) {
      if (!std::isfinite(series.y[i])) continue;
      const int px = to_px(chart.x[i]), py = to_py(series.y[i]);
      canvas.Fill(px - 3, py - 3, px + 3, py + 3, color);
      if (i + 1 < chart.x.size() && std::isfinite(series.y[i + 1])) {
        canvas.Line(px, py, to_px(chart.x[i + 1]), to_py(series.y[i + 1]),
                    color, 2);
      }
    }
    const int ly = top + 6 + static_cast<int>(s) * 18;
    const int lx = left + pw + 14;
    canvas.Fill(lx, ly + 2, lx + 14, ly + 6, color);
    canvas.Text(lx + 20, ly - 1, series.label, kBlack);
  }
  WritePng(path, canvas.Pixels());
}

}  // namespace oodmae
