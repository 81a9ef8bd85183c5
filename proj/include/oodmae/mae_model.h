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

#ifndef OODMAE_MAE_MODEL_H_
#define OODMAE_MAE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oodmae/image.h"
#include "oodmae/layers.h"
#include "oodmae/matrix.h"
#include "oodmae/params.h"
#include "oodmae/patchgrid.h"

namespace oodmae {

struct ModelConfig {
  int patch_size = 8;
  int embed_dim = 64;
  int encoder_depth = 4;
  int encoder_heads = 4;
  int decoder_dim = 32;
  int decoder_depth = 2;
  int decoder_heads = 4;
  int resolution = 64;
  int channels = 3;
  int mlp_ratio = 4;

  // Throws ConfigError describing the first violated constraint.
  void Validate() const;
  int grid_size() const { return resolution / patch_size; }
  int num_patches() const { return grid_size() * grid_size(); }
  int patch_dim() const { return patch_size * patch_size * channels; }

  // Desk-scale default: 64px inputs cut into 8px patches.
  static ModelConfig Tiny();
  // ViT-Base/16 encoder at 224px with the standard 512-wide MAE decoder.
  static ModelConfig Base();
  // "tiny" or "base"; throws ConfigError otherwise.
  static ModelConfig Preset(const std::string& name);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Encoder output for the visible patches of one image.
struct LatentTokens {
  Matrix tokens;                     // [num_visible, embed_dim]
  std::vector<int> visible_indices;  // grid positions, strictly increasing
};

// Fixed 2-D sine-cosine table [grid * grid, dim]. The first half of each row
// encodes the column, the second half the row.
Matrix SinCosPositionTable(int grid, int dim);

// Masked autoencoder: a ViT encoder over visible patch tokens and a light
// transformer decoder over the full token stack, in which masked positions
// hold a shared learned empty token.
class MaeModel {
 public:
  // Parameters are zero (LayerNorm scales one) until initialised or loaded.
  explicit MaeModel(const ModelConfig& config);

  // Truncated-normal (std 0.02) weights and empty token, zero biases.
  static MaeModel Init(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  LatentTokens Encode(const Image& img, const MaskTemplate& mask) const;
  // Raw per-token pixel predictions [num_patches, patch_dim].
  Matrix DecodeTokens(const LatentTokens& latent,
                      const MaskTemplate& mask) const;
  Image Decode(const LatentTokens& latent, const MaskTemplate& mask) const;

  // Mean squared error over every pixel of the image (visible and masked
  // patches alike) for one forward pass.
  double Loss(const Image& img, const MaskTemplate& mask) const;
  // Same loss; adds loss_scale * dLoss/dparams into `grads`, which must be
  // params().total_size() long.
  double LossAndGradient(const Image& img, const MaskTemplate& mask,
                         double loss_scale, std::span<double> grads) const;

  ParamStore::Id empty_token_id() const { return empty_token_; }
  ParamStore::Id output_weight_id() const { return decoder_pred_.weight; }
  ParamStore::Id output_bias_id() const { return decoder_pred_.bias; }

 private:
  struct Trace;

  void CheckImage(const Image& img, const MaskTemplate& mask) const;
  void EncodeInto(const Image& img, const std::vector<int>& visible,
                  Matrix& latent, Trace* trace) const;
  void DecodeInto(const Matrix& latent, const MaskTemplate& mask,
                  const std::vector<int>& visible, Matrix& pred,
                  Trace* trace) const;

  ModelConfig config_;
  ParamStore params_;
  Matrix encoder_pos_;
  Matrix decoder_pos_;
  nn::Linear patch_embed_;
  std::vector<nn::Block> encoder_blocks_;
  nn::LayerNorm encoder_norm_;
  nn::Linear decoder_embed_;
  ParamStore::Id empty_token_ = 0;
  std::vector<nn::Block> decoder_blocks_;
  nn::LayerNorm decoder_norm_;
  nn::Linear decoder_pred_;
};

struct Checkpoint {
  MaeModel model;
  uint64_t train_seed = 0;
  double masking_ratio = 0.0;
};

// Binary container: magic, version, a JSON header with the model config
// and training metadata, then every parameter tensor by canonical name as
// little-endian float64.
void SaveCheckpoint(const std::filesystem::path& path, const MaeModel& model,
                    uint64_t train_seed, double masking_ratio);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace oodmae

#endif  // OODMAE_MAE_MODEL_H_
