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

#ifndef OODMAE_TRAINER_H_
#define OODMAE_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oodmae/corpus.h"
#include "oodmae/image.h"
#include "oodmae/mae_model.h"

namespace oodmae {

struct TrainConfig {
  double masking_ratio = 0.35;
  int batch_size = 44;
  double learning_rate = 1.5e-4;
  double weight_decay = 5e-2;
  int epochs = 100;
  int warmup_epochs = 10;
  uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double adam_eps = 1e-8;

  // Throws ConfigError.
  void Validate() const;
};

// Mean over all C*H*W elements of the squared difference.
double ReconstructionLoss(const Image& recon, const Image& target);

// Linear warmup over `warmup_epochs`, then half-cosine decay to zero at the
// end of training. `progress` is fractional epochs completed.
double LearningRateAt(const TrainConfig& cfg, double progress);

// Decoupled-weight-decay Adam over a ParamStore. Decay applies only to
// entries flagged `decay` (matrix weights); biases, norms and the empty
// token are never decayed.
class AdamW {
 public:
  AdamW(const ParamStore& params, double beta1, double beta2, double eps);
  void Step(ParamStore& params, std::span<const double> grads, double lr,
            double weight_decay);
  int steps() const { return steps_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::vector<uint8_t> decay_;
  double beta1_, beta2_, eps_;
  int steps_ = 0;
};

struct LossRecord {
  int epoch = 0;
  int step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  MaeModel model;
  std::vector<LossRecord> steps;
  std::vector<double> epoch_losses;  // mean loss per epoch
};

struct TrainOptions {
  // When set, the final checkpoint is written here; on divergence the last
  // finite-loss parameters are written here before DivergenceError escapes.
  std::optional<std::filesystem::path> checkpoint_path;
  // When set, one CSV row (epoch,step,loss,lr) per optimiser step.
  std::optional<std::filesystem::path> loss_log_path;
  // Called after every epoch with (epoch, mean loss).
  std::function<void(int, double)> on_epoch;
};

// Trains from scratch on in-memory healthy images. Every step draws a fresh
// mask per image, runs encoder and decoder, and back-propagates the
// all-patch reconstruction loss averaged over the batch.
TrainResult TrainOnImages(std::span<const Image> images,
                          const ModelConfig& model_cfg,
                          const TrainConfig& train_cfg,
                          const TrainOptions& options = {});

// Loads every train-split entry at the model resolution and trains. Throws
// ContractViolation if any train entry is anomalous.
TrainResult Train(const DatasetManifest& manifest, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg,
                  const TrainOptions& options = {});

void WriteLossLog(const std::filesystem::path& path,
                  std::span<const LossRecord> records);

struct GradCheckEntry {
  std::string name;  // parameter tensor
  size_t index = 0;  // flat index within the tensor
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps parameters whose gradient
// is numerically zero from reporting pure round-off as relative error.
double GradRelativeError(double analytic, double numeric, double floor = 1e-7);

// Central finite differences (step `step`) of the reconstruction loss for
// `num_params` scalars drawn uniformly from all parameters, compared with
// the back-propagated gradient.
GradCheckReport GradCheck(const MaeModel& model, const Image& img,
                          const MaskTemplate& mask, int num_params,
                          uint64_t seed, double step = 1e-5);

// Convenience: initialises `model_cfg` from `seed`, uses a synthetic healthy
// image and a 0.35-ratio mask drawn from the same seed.
GradCheckReport GradCheck(const ModelConfig& model_cfg, uint64_t seed,
                          int num_params);

}  // namespace oodmae

#endif  // OODMAE_TRAINER_H_
