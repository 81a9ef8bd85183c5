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

#include "oodmae/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "oodmae/error.h"

namespace oodmae {

namespace {

// Owns a png_image and releases libpng state on every exit path.
struct PngImageGuard {
  png_image image{};
  PngImageGuard() { image.version = PNG_IMAGE_VERSION; }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard&) = delete;
  PngImageGuard& operator=(const PngImageGuard&) = delete;
};

}  // namespace

double BinaryMask::ForegroundFraction() const {
  if (data.empty()) return 0.0;
  size_t fg = 0;
  for (uint8_t v : data) fg += v != 0;
  return static_cast<double>(fg) / static_cast<double>(data.size());
}

uint8_t QuantizeUnit(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::lround(clamped * 255.0));
}

Pixels8 ReadPng(const std::filesystem::path& path, int channels) {
  if (channels != 1 && channels != 3) {
    throw ValueError("ReadPng: channels must be 1 or 3");
  }
  PngImageGuard guard;
  if (!png_image_begin_read_from_file(&guard.image, path.c_str())) {
    throw DecodeError("cannot decode " + path.string() + ": " +
                      guard.image.message);
  }
  guard.image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Pixels8 out;
  out.channels = channels;
  out.width = static_cast<int>(guard.image.width);
  out.height = static_cast<int>(guard.image.height);
  out.data.resize(PNG_IMAGE_SIZE(guard.image));
  if (!png_image_finish_read(&guard.image, nullptr, out.data.data(), 0,
                             nullptr)) {
    throw DecodeError("cannot decode " + path.string() + ": " +
                      guard.image.message);
  }
  return out;
}

void WritePng(const std::filesystem::path& path, const Pixels8& pixels) {
  if (pixels.channels != 1 && pixels.channels != 3) {
    throw ValueError("WritePng: channels must be 1 or 3");
  }
  PngImageGuard guard;
  guard.image.width = static_cast<png_uint_32>(pixels.width);
  guard.image.height = static_cast<png_uint_32>(pixels.height);
  guard.image.format = pixels.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&guard.image, path.c_str(), 0,
                               pixels.data.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + guard.image.message);
  }
}

Image ResizeBilinear(const Image& src, int height, int width) {
  if (src.height == height && src.width == width) return src;
  Image out(src.channels, height, width);
  const double sy = static_cast<double>(src.height) / height;
  const double sx = static_cast<double>(src.width) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top =
            src.at(c, y0, x0) * (1.0 - wx) + src.at(c, y0, x1) * wx;
        const double bottom =
            src.at(c, y1, x0) * (1.0 - wx) + src.at(c, y1, x1) * wx;
        out.at(c, y, x) = top * (1.0 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

Image LoadImage(const std::filesystem::path& path, int resolution) {
  if (resolution <= 0) throw ValueError("LoadImage: resolution must be > 0");
  const Pixels8 px = ReadPng(path, 3);
  Image img(3, px.height, px.width);
  for (int y = 0; y < px.height; ++y) {
    for (int x = 0; x < px.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(c, y, x) =
            px.data[(static_cast<size_t>(y) * px.width + x) * 3 + c] / 255.0;
      }
    }
  }
  return ResizeBilinear(img, resolution, resolution);
}

void SaveImage(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 3 && img.channels != 1) {
    throw ShapeError("SaveImage: expected 1 or 3 channels");
  }
  Pixels8 px;
  px.channels = img.channels;
  px.height = img.height;
  px.width = img.width;
  px.data.resize(img.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        px.data[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
            QuantizeUnit(img.at(c, y, x));
      }
    }
  }
  WritePng(path, px);
}

BinaryMask LoadMask(const std::filesystem::path& path, int resolution) {
  const Pixels8 px = ReadPng(path, 1);
  BinaryMask full(px.height, px.width);
  for (size_t i = 0; i < px.data.size(); ++i) full.data[i] = px.data[i] != 0;
  if (resolution <= 0 ||
      (full.height == resolution && full.width == resolution)) {
    return full;
  }
  BinaryMask out(resolution, resolution);
  for (int y = 0; y < resolution; ++y) {
    const int sy =
        std::min(full.height - 1,
                 static_cast<int>((y + 0.5) * full.height / resolution));
    for (int x = 0; x < resolution; ++x) {
      const int sx =
          std::min(full.width - 1,
                   static_cast<int>((x + 0.5) * full.width / resolution));
      out.at(y, x) = full.at(sy, sx);
    }
  }
  return out;
}

void SaveMask(const std::filesystem::path& path, const BinaryMask& mask) {
  Pixels8 px;
  px.channels = 1;
  px.height = mask.height;
  px.width = mask.width;
  px.data.resize(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) px.data[i] = mask.data[i] ? 255 : 0;
  WritePng(path, px);
}

ScoreMap LoadGrayMap(const std::filesystem::path& path) {
  const Pixels8 px = ReadPng(path, 1);
  ScoreMap map(px.height, px.width);
  for (size_t i = 0; i < px.data.size(); ++i) map.data[i] = px.data[i] / 255.0;
  return map;
}

void SaveGrayMap(const std::filesystem::path& path, const ScoreMap& map) {
  Pixels8 px;
  px.channels = 1;
  px.height = map.height;
  px.width = map.width;
  px.data.resize(map.size());
  for (size_t i = 0; i < map.size(); ++i) {
    px.data[i] = QuantizeUnit(map.data[i]);
  }
  WritePng(path, px);
}

}  // namespace oodmae
