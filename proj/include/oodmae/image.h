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

#ifndef OODMAE_IMAGE_H_
#define OODMAE_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace oodmae {

// Dense planar image, channel-major (C, H, W). Values nominally in [0, 1].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int c, int h, int w, double fill = 0.0)
      : channels(c),
        height(h),
        width(w),
        data(static_cast<size_t>(c) * h * w, fill) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  size_t size() const { return data.size(); }
  bool SameShape(const Image& other) const {
    return channels == other.channels && height == other.height &&
           width == other.width;
  }
  friend bool operator==(const Image&, const Image&) = default;
};

// Single-channel real-valued map (anomaly scores, difference maps).
struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ScoreMap() = default;
  ScoreMap(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return data.size(); }
  friend bool operator==(const ScoreMap&, const ScoreMap&) = default;
};

// Binary map with values in {0, 1}: ground-truth masks and binarised
// predictions.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int h, int w, uint8_t fill = 0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return data.size(); }
  double ForegroundFraction() const;
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Raw 8-bit interleaved pixels as decoded from disk.
struct Pixels8 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;
};

// Throws DecodeError when the file cannot be read or decoded.
Pixels8 ReadPng(const std::filesystem::path& path, int channels);
// Throws IoError on failure.
void WritePng(const std::filesystem::path& path, const Pixels8& pixels);

// Half-pixel-centre bilinear resample of every channel.
Image ResizeBilinear(const Image& src, int height, int width);

// Decodes an 8-bit RGB file, scales to [0, 1] and resizes to a square of
// `resolution` pixels.
Image LoadImage(const std::filesystem::path& path, int resolution);
// Quantises to 8 bits with round-to-nearest after clamping to [0, 1].
void SaveImage(const std::filesystem::path& path, const Image& img);

// Any nonzero pixel is foreground. Nearest-neighbour resized when the file
// resolution differs from `resolution` (0 keeps the file size).
BinaryMask LoadMask(const std::filesystem::path& path, int resolution = 0);
void SaveMask(const std::filesystem::path& path, const BinaryMask& mask);

// Grayscale 8-bit file as a map with values v / 255.
ScoreMap LoadGrayMap(const std::filesystem::path& path);
// Writes round(255 * clamp(v, 0, 1)).
void SaveGrayMap(const std::filesystem::path& path, const ScoreMap& map);

uint8_t QuantizeUnit(double v);

}  // namespace oodmae

#endif  // OODMAE_IMAGE_H_
