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

#ifndef OODMAE_INFERENCE_H_
#define OODMAE_INFERENCE_H_

#include <cstdint>
#include <filesystem>

#include "oodmae/image.h"
#include "oodmae/latent_stats.h"
#include "oodmae/mae_model.h"

namespace oodmae {

struct InferenceConfig {
  double masking_ratio = 0.35;
  int num_mask_samples = 1;
  uint64_t mask_seed = 0;
  // 0 selects the model's patch size (16 for the base preset).
  int pool_kernel = 0;
  StatsGranularity stats_mode = StatsGranularity::kChannel;

  void Validate() const;
};

// Seed of the k-th mask draw.
uint64_t InferenceMaskSeed(uint64_t mask_seed, int k);

// For each of the K mask draws: encode, standardise with the in-distribution
// statistics, decode. The K reconstructions are averaged and clamped to
// [0, 1].
Image ReconstructOod(const Image& img, const MaeModel& model,
                     const LatentStats& stats, const InferenceConfig& cfg);

// Channel mean of |recon - img|, before pooling.
ScoreMap DifferenceMap(const Image& img, const Image& recon);

// DifferenceMap followed by `kernel` x `kernel` average pooling (stride 1,
// reflect padding). `pool_kernel` must be resolved (> 0).
ScoreMap AnomalyScore(const Image& img, const Image& recon, int pool_kernel);
ScoreMap AnomalyScore(const Image& img, const Image& recon,
                      const InferenceConfig& cfg, int patch_size);

// Per-image min-max rescale to [0, 1]; constant maps become all zeros.
ScoreMap NormaliseMap(const ScoreMap& map);

// Raw map container: magic "OODMAP01", int32 height, width, a 4-byte dtype
// tag ("f64\0"), then row-major values.
void SaveRawMap(const std::filesystem::path& path, const ScoreMap& map);
ScoreMap LoadRawMap(const std::filesystem::path& path);

}  // namespace oodmae

#endif  // OODMAE_INFERENCE_H_
