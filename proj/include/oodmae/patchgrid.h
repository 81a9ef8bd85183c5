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

#ifndef OODMAE_PATCHGRID_H_
#define OODMAE_PATCHGRID_H_

#include <cstdint>
#include <vector>

#include "oodmae/image.h"
#include "oodmae/matrix.h"

namespace oodmae {

// Non-overlapping patches of an image. Token t covers grid cell
// (t / grid_w, t % grid_w); within a token pixels are row-major and
// channel-last: element ((py * p + px) * C + c).
struct PatchSequence {
  Matrix tokens;  // [grid_h * grid_w, p * p * C]
  int patch_size = 0;
  int grid_h = 0;
  int grid_w = 0;
  int channels = 0;

  int num_patches() const { return grid_h * grid_w; }
};

PatchSequence Patchify(const Image& img, int patch_size);
Image Unpatchify(const PatchSequence& seq);

// Patch-token matrix <-> image, for callers that keep the grid shape
// elsewhere.
Matrix PatchTokens(const Image& img, int patch_size);
Image TokensToImage(const Matrix& tokens, int patch_size, int channels,
                    int height, int width);

// Number of masked patches for `num_patches` at `ratio`, rounding half
// away from zero.
int MaskedCount(int num_patches, double ratio);

struct MaskTemplate {
  std::vector<uint8_t> masked;  // 1 = hidden from the encoder
  double ratio = 0.0;
  uint64_t seed = 0;

  int num_patches() const { return static_cast<int>(masked.size()); }
  int masked_count() const;
  // Strictly increasing indices of unmasked patches.
  std::vector<int> VisibleIndices() const;

  static MaskTemplate AllVisible(int num_patches);
};

// Uniformly random subset of exactly MaskedCount(num_patches, ratio)
// patches. Deterministic in (num_patches, ratio, seed). Throws ValueError
// unless 0 <= ratio < 1.
MaskTemplate SampleMask(int num_patches, double ratio, uint64_t seed);

}  // namespace oodmae

#endif  // OODMAE_PATCHGRID_H_
