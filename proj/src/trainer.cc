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

#include "oodmae/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "oodmae/error.h"
#include "oodmae/kernels.h"
#include "oodmae/random.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oodmae {

void TrainConfig::Validate() const {
  if (!(masking_ratio > 0.0 && masking_ratio < 1.0)) {
    throw ConfigError("masking_ratio must lie in (0, 1)");
  }
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (warmup_epochs < 0) throw ConfigError("warmup_epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

double ReconstructionLoss(const Image& recon, const Image& target) {
  if (!recon.SameShape(target)) {
    throw ShapeError("reconstruction and target shapes differ");
  }
  if (recon.size() == 0) throw ShapeError("empty image");
  double sum = 0.0;
  for (size_t i = 0; i < recon.size(); ++i) {
    const double d = recon.data[i] - target.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(recon.size());
}

double LearningRateAt(const TrainConfig& cfg, double progress) {
  const double warmup = cfg.warmup_epochs;
  if (progress < warmup) return cfg.learning_rate * progress / warmup;
  const double span = cfg.epochs - warmup;
  if (span <= 0.0) return cfg.learning_rate;
  const double t = std::min(1.0, (progress - warmup) / span);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * t));
}

AdamW::AdamW(const ParamStore& params, double beta1, double beta2, double eps)
    : m_(params.total_size(), 0.0),
      v_(params.total_size(), 0.0),
      decay_(params.total_size(), 0),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  for (const ParamEntry& e : params.entries()) {
    std::fill_n(decay_.begin() + e.offset, e.size, e.decay ? 1 : 0);
  }
}

void AdamW::Step(ParamStore& params, std::span<const double> grads, double lr,
                 double weight_decay) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, steps_);
  const double c2 = 1.0 - std::pow(beta2_, steps_);
  std::vector<double>& p = params.flat();
  const size_t n = p.size();
#pragma omp parallel for schedule(static) if (n > (1 << 16))
  for (size_t i = 0; i < n; ++i) {
    if (decay_[i]) p[i] -= lr * weight_decay * p[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
  }
}

void WriteLossLog(const std::filesystem::path& path,
                  std::span<const LossRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write loss log " + path.string());
  out << "epoch,step,loss,lr\n";
  out.precision(10);
  for (const LossRecord& r : records) {
    out << r.epoch << ',' << r.step << ',' << r.loss << ',' << r.lr << '\n';
  }
}

namespace {

bool AllFinite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TrainResult TrainOnImages(std::span<const Image> images,
                          const ModelConfig& model_cfg,
                          const TrainConfig& train_cfg,
                          const TrainOptions& options) {
  train_cfg.Validate();
  model_cfg.Validate();
  if (images.empty()) throw EmptyCorpusError("no training images");

  TrainResult result{MaeModel::Init(model_cfg, train_cfg.seed), {}, {}};
  MaeModel& model = result.model;
  const size_t num_params = model.params().total_size();
  AdamW optimizer(model.params(), train_cfg.beta1, train_cfg.beta2,
                  train_cfg.adam_eps);

  // One gradient buffer per thread when the batch is split across threads.
  // Buffers are reduced in thread order, so a fixed thread count gives a
  // fixed result.
  const int threads = kernels::MaxThreads();
  const bool split_batch =
      threads > 1 && num_params * static_cast<size_t>(threads) < (1u << 27);
  const int buffers = split_batch ? threads : 1;
  std::vector<std::vector<double>> thread_grads(
      buffers, std::vector<double>(num_params, 0.0));

  const int n = static_cast<int>(images.size());
  const int batch = std::min(train_cfg.batch_size, n);
  const int steps_per_epoch = (n + batch - 1) / batch;
  const int num_patches = model_cfg.num_patches();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(DeriveSeed(train_cfg.seed, 0x53485546));

  int global_step = 0;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.Below(i + 1)]);
    }
    double epoch_sum = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s) {
      const int begin = s * batch;
      const int end = std::min(n, begin + batch);
      const int count = end - begin;
      const double lr = LearningRateAt(
          train_cfg, epoch + static_cast<double>(s) / steps_per_epoch);
      std::vector<double> losses(count, 0.0);
      for (auto& g : thread_grads) std::fill(g.begin(), g.end(), 0.0);

#pragma omp parallel for schedule(static) num_threads(buffers) if (split_batch)
      for (int j = 0; j < count; ++j) {
#ifdef _OPENMP
        const int tid = split_batch ? omp_get_thread_num() : 0;
#else
        const int tid = 0;
#endif
        const uint64_t mask_seed =
            DeriveSeed(train_cfg.seed ^ 0x4D41534BULL,
                       static_cast<uint64_t>(global_step) * batch + j);
        const MaskTemplate mask =
            SampleMask(num_patches, train_cfg.masking_ratio, mask_seed);
        losses[j] = model.LossAndGradient(images[order[begin + j]], mask,
                                          1.0 / count, thread_grads[tid]);
      }
      std::vector<double>& grads = thread_grads[0];
      for (int t = 1; t < buffers; ++t) {
        for (size_t i = 0; i < num_params; ++i) grads[i] += thread_grads[t][i];
      }
      const double loss =
          std::accumulate(losses.begin(), losses.end(), 0.0) / count;
      if (!std::isfinite(loss) || !AllFinite(grads)) {
        if (options.checkpoint_path) {
          SaveCheckpoint(*options.checkpoint_path, model, train_cfg.seed,
                         train_cfg.masking_ratio);
        }
        if (options.loss_log_path) {
          WriteLossLog(*options.loss_log_path, result.steps);
        }
        throw DivergenceError("non-finite loss at epoch " +
                              std::to_string(epoch) + ", step " +
                              std::to_string(global_step));
      }
      optimizer.Step(model.params(), grads, lr, train_cfg.weight_decay);
      result.steps.push_back({epoch, global_step, loss, lr});
      epoch_sum += loss * count;
      ++global_step;
    }
    result.epoch_losses.push_back(epoch_sum / n);
    if (options.on_epoch) options.on_epoch(epoch, result.epoch_losses.back());
  }

  if (options.loss_log_path) WriteLossLog(*options.loss_log_path, result.steps);
  if (options.checkpoint_path) {
    SaveCheckpoint(*options.checkpoint_path, model, train_cfg.seed,
                   train_cfg.masking_ratio);
  }
  return result;
}

TrainResult Train(const DatasetManifest& manifest, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const TrainOptions& options) {
  for (const ManifestEntry& e : manifest.entries) {
    if (e.label != Label::kHealthy) {
      throw ContractViolation("training manifest contains anomalous entry " +
                              e.image_path.string());
    }
  }
  manifest.Validate();
  const std::vector<ManifestEntry> entries = manifest.Select(Split::kTrain);
  if (entries.empty()) {
    throw ContractViolation("training manifest has no train-split entries");
  }
  std::vector<Image> images(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < entries.size(); ++i) {
    images[i] = LoadImage(entries[i].image_path, model_cfg.resolution);
  }
  return TrainOnImages(images, model_cfg, train_cfg, options);
}

double GradRelativeError(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport GradCheck(const MaeModel& model, const Image& img,
                          const MaskTemplate& mask, int num_params,
                          uint64_t seed, double step) {
  const size_t total = model.params().total_size();
  std::vector<double> grads(total, 0.0);
  model.LossAndGradient(img, mask, 1.0, grads);

  Rng rng(DeriveSeed(seed, 0x47524144));
  std::vector<size_t> picked;
  while (picked.size() < static_cast<size_t>(num_params) &&
         picked.size() < total) {
    const size_t idx = rng.Below(total);
    if (std::find(picked.begin(), picked.end(), idx) == picked.end()) {
      picked.push_back(idx);
    }
  }

  MaeModel probe = model;
  std::vector<double>& values = probe.params().flat();
  GradCheckReport report;
  for (size_t idx : picked) {
    const double original = values[idx];
    values[idx] = original + step;
    const double plus = probe.Loss(img, mask);
    values[idx] = original - step;
    const double minus = probe.Loss(img, mask);
    values[idx] = original;

    GradCheckEntry entry;
    for (const ParamEntry& e : model.params().entries()) {
      if (idx >= e.offset && idx < e.offset + e.size) {
        entry.name = e.name;
        entry.index = idx - e.offset;
        break;
      }
    }
    entry.analytic = grads[idx];
    entry.numeric = (plus - minus) / (2.0 * step);
    entry.relative_error = GradRelativeError(entry.analytic, entry.numeric);
    report.max_relative_error =
        std::max(report.max_relative_error, entry.relative_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

GradCheckReport GradCheck(const ModelConfig& model_cfg, uint64_t seed,
                          int num_params) {
  const MaeModel model = MaeModel::Init(model_cfg, seed);
  const Image img = SynthHealthy(seed, model_cfg.resolution);
  const MaskTemplate mask =
      SampleMask(model_cfg.num_patches(), 0.35, DeriveSeed(seed, 1));
  return GradCheck(model, img, mask, num_params, seed);
}

}  // namespace oodmae
