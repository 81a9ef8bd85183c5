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

#include "oodmae/inference.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "oodmae/error.h"
#include "oodmae/kernels.h"
#include "oodmae/random.h"

namespace oodmae {

void InferenceConfig::Validate() const {
  if (!(masking_ratio >= 0.0 && masking_ratio < 1.0)) {
    throw ConfigError("inference masking_ratio must lie in [0, 1)");
  }
  if (num_mask_samples < 1) throw ConfigError("num_mask_samples must be >= 1");
  if (pool_kernel < 0) throw ConfigError("pool_kernel must be >= 0");
}

uint64_t InferenceMaskSeed(uint64_t mask_seed, int k) {
  return DeriveSeed(mask_seed ^ 0x494E4645ULL, static_cast<uint64_t>(k));
}

Image ReconstructOod(const Image& img, const MaeModel& model,
                     const LatentStats& stats, const InferenceConfig& cfg) {
  cfg.Validate();
  const ModelConfig& mc = model.config();
  if (stats.dim != mc.embed_dim) {
    throw ShapeError("stats width " + std::to_string(stats.dim) +
                     " does not match model embed_dim " +
                     std::to_string(mc.embed_dim));
  }
  if (stats.positions != 1 && stats.positions != mc.num_patches()) {
    throw ShapeError("stats grid does not match the model's patch grid");
  }
  Image sum(mc.channels, mc.resolution, mc.resolution);
  for (int k = 0; k < cfg.num_mask_samples; ++k) {
    const MaskTemplate mask = SampleMask(mc.num_patches(), cfg.masking_ratio,
                                         InferenceMaskSeed(cfg.mask_seed, k));
    const LatentTokens latent = Standardise(model.Encode(img, mask), stats);
    const Image recon = model.Decode(latent, mask);
    for (size_t i = 0; i < sum.size(); ++i) sum.data[i] += recon.data[i];
  }
  const double inv = 1.0 / cfg.num_mask_samples;
  for (double& v : sum.data) v = std::clamp(v * inv, 0.0, 1.0);
  return sum;
}

ScoreMap DifferenceMap(const Image& img, const Image& recon) {
  if (!img.SameShape(recon)) {
    throw ShapeError("image and reconstruction shapes differ");
  }
  ScoreMap diff(img.height, img.width);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        diff.at(y, x) += std::abs(recon.at(c, y, x) - img.at(c, y, x));
      }
    }
  }
  const double inv = 1.0 / img.channels;
  for (double& v : diff.data) v *= inv;
  return diff;
}

ScoreMap AnomalyScore(const Image& img, const Image& recon, int pool_kernel) {
  if (pool_kernel < 1) throw ValueError("pool_kernel must be >= 1");
  const ScoreMap diff = DifferenceMap(img, recon);
  ScoreMap pooled(diff.height, diff.width);
  kernels::AvgPoolReflect(diff.data, diff.height, diff.width, pool_kernel,
                          pooled.data);
  return pooled;
}

ScoreMap AnomalyScore(const Image& img, const Image& recon,
                      const InferenceConfig& cfg, int patch_size) {
  return AnomalyScore(img, recon,
                      cfg.pool_kernel > 0 ? cfg.pool_kernel : patch_size);
}

ScoreMap NormaliseMap(const ScoreMap& map) {
  ScoreMap out(map.height, map.width);
  if (map.data.empty()) return out;
  const auto [lo, hi] = std::minmax_element(map.data.begin(), map.data.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (size_t i = 0; i < map.size(); ++i) {
    out.data[i] = (map.data[i] - *lo) / range;
  }
  return out;
}

namespace {
constexpr char kMapMagic[8] = {'O', 'O', 'D', 'M', 'A', 'P', '0', '1'};
constexpr char kDtypeF64[4] = {'f', '6', '4', '\0'};
}  // namespace

void SaveRawMap(const std::filesystem::path& path, const ScoreMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const int32_t dims[2] = {map.height, map.width};
  out.write(kMapMagic, sizeof(kMapMagic));
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(kDtypeF64, sizeof(kDtypeF64));
  out.write(reinterpret_cast<const char*>(map.data.data()),
            static_cast<std::streamsize>(map.size() * sizeof(double)));
  if (!out) throw IoError("cannot write " + path.string());
}

ScoreMap LoadRawMap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[8];
  int32_t dims[2];
  char dtype[4];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  in.read(dtype, sizeof(dtype));
  if (!in || std::memcmp(magic, kMapMagic, 8) != 0 ||
      std::memcmp(dtype, kDtypeF64, 4) != 0 || dims[0] < 0 || dims[1] < 0) {
    throw DecodeError(path.string() + " is not a raw score map");
  }
  ScoreMap map(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(map.data.data()),
          static_cast<std::streamsize>(map.size() * sizeof(double)));
  if (!in) throw DecodeError("truncated raw map " + path.string());
  return map;
}

}  // namespace oodmae
