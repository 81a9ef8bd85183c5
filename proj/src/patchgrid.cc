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

#include "oodmae/patchgrid.h"

#include <cmath>
#include <numeric>
#include <string>

#include "oodmae/error.h"
#include "oodmae/random.h"

namespace oodmae {

Matrix PatchTokens(const Image& img, int patch_size) {
  if (patch_size <= 0 || img.height % patch_size != 0 ||
      img.width % patch_size != 0) {
    throw ShapeError("image " + std::to_string(img.height) + "x" +
                     std::to_string(img.width) +
                     " is not divisible by patch size " +
                     std::to_string(patch_size));
  }
  const int gh = img.height / patch_size;
  const int gw = img.width / patch_size;
  const int c = img.channels;
  Matrix tokens(gh * gw, patch_size * patch_size * c);
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      double* token = tokens.row(gy * gw + gx);
      for (int py = 0; py < patch_size; ++py) {
        for (int px = 0; px < patch_size; ++px) {
          for (int ch = 0; ch < c; ++ch) {
            token[(py * patch_size + px) * c + ch] =
                img.at(ch, gy * patch_size + py, gx * patch_size + px);
          }
        }
      }
    }
  }
  return tokens;
}

Image TokensToImage(const Matrix& tokens, int patch_size, int channels,
                    int height, int width) {
  if (patch_size <= 0 || height % patch_size != 0 || width % patch_size != 0) {
    throw ShapeError("grid does not tile the image");
  }
  const int gh = height / patch_size;
  const int gw = width / patch_size;
  if (tokens.rows != gh * gw ||
      tokens.cols != patch_size * patch_size * channels) {
    throw ShapeError("token matrix " + std::to_string(tokens.rows) + "x" +
                     std::to_string(tokens.cols) + " does not match grid " +
                     std::to_string(gh) + "x" + std::to_string(gw));
  }
  Image img(channels, height, width);
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      const double* token = tokens.row(gy * gw + gx);
      for (int py = 0; py < patch_size; ++py) {
        for (int px = 0; px < patch_size; ++px) {
          for (int ch = 0; ch < channels; ++ch) {
            img.at(ch, gy * patch_size + py, gx * patch_size + px) =
                token[(py * patch_size + px) * channels + ch];
          }
        }
      }
    }
  }
  return img;
}

PatchSequence Patchify(const Image& img, int patch_size) {
  PatchSequence seq;
  seq.tokens = PatchTokens(img, patch_size);
  seq.patch_size = patch_size;
  seq.grid_h = img.height / patch_size;
  seq.grid_w = img.width / patch_size;
  seq.channels = img.channels;
  return seq;
}

Image Unpatchify(const PatchSequence& seq) {
  return TokensToImage(seq.tokens, seq.patch_size, seq.channels,
                       seq.grid_h * seq.patch_size,
                       seq.grid_w * seq.patch_size);
}

int MaskedCount(int num_patches, double ratio) {
  return static_cast<int>(std::lround(ratio * num_patches));
}

int MaskTemplate::masked_count() const {
  return static_cast<int>(std::accumulate(masked.begin(), masked.end(), 0));
}

std::vector<int> MaskTemplate::VisibleIndices() const {
  std::vector<int> visible;
  visible.reserve(masked.size());
  for (int i = 0; i < num_patches(); ++i) {
    if (!masked[i]) visible.push_back(i);
  }
  return visible;
}

MaskTemplate MaskTemplate::AllVisible(int num_patches) {
  MaskTemplate m;
  m.masked.assign(num_patches, 0);
  return m;
}

MaskTemplate SampleMask(int num_patches, double ratio, uint64_t seed) {
  if (num_patches <= 0) throw ValueError("num_patches must be positive");
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw ValueError("masking ratio must lie in [0, 1), got " +
                     std::to_string(ratio));
  }
  const int count = MaskedCount(num_patches, ratio);
  // Partial Fisher-Yates: the first `count` slots become the masked set.
  std::vector<int> order(num_patches);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.Below(num_patches - i));
    std::swap(order[i], order[j]);
  }
  MaskTemplate mask;
  mask.masked.assign(num_patches, 0);
  mask.ratio = ratio;
  mask.seed = seed;
  for (int i = 0; i < count; ++i) mask.masked[order[i]] = 1;
  return mask;
}

}  // namespace oodmae
