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

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "oodmae/error.h"
#include "oodmae/patchgrid.h"
#include "oodmae/random.h"

namespace oodmae {
namespace {

namespace fs = std::filesystem;

std::vector<Image> HealthySet(int n, int res, uint64_t seed = 0) {
  std::vector<Image> images;
  for (int i = 0; i < n; ++i) {
    images.push_back(SynthHealthy(DeriveSeed(seed, i), res));
  }
  return images;
}

TrainConfig QuickConfig(int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 4;
  t.learning_rate = 1e-3;
  t.warmup_epochs = 1;
  return t;
}

TEST(ReconstructionLossTest, Examples) {
  Image target(3, 4, 4, 0.3);
  EXPECT_EQ(ReconstructionLoss(target, target), 0.0);
  Image shifted(3, 4, 4, 0.3 + 0.25);
  EXPECT_NEAR(ReconstructionLoss(shifted, target), 0.0625, 1e-15);

  Image ones(3, 4, 4, 1.0), half = ones;
  for (size_t i = 0; i < half.size() / 2; ++i) half.data[i] = 0.0;
  EXPECT_DOUBLE_EQ(ReconstructionLoss(half, ones), 0.5);
  EXPECT_THROW(ReconstructionLoss(Image(3, 4, 4), Image(3, 4, 5)), ShapeError);
}

TEST(ReconstructionLossTest, InvariantToPatchOrder) {
  const Image a = SynthHealthy(1, 32), b = SynthHealthy(2, 32);
  PatchSequence pa = Patchify(a, 8), pb = Patchify(b, 8);
  Rng rng(4);
  for (int t = pa.num_patches() - 1; t > 0; --t) {
    const int u = static_cast<int>(rng.Below(t + 1));
    for (int j = 0; j < pa.tokens.cols; ++j) {
      std::swap(pa.tokens(t, j), pa.tokens(u, j));
      std::swap(pb.tokens(t, j), pb.tokens(u, j));
    }
  }
  EXPECT_NEAR(ReconstructionLoss(Unpatchify(pa), Unpatchify(pb)),
              ReconstructionLoss(a, b), 1e-15);
}

TEST(ScheduleTest, WarmupThenCosine) {
  TrainConfig c;
  c.learning_rate = 1.5e-4;
  c.epochs = 100;
  c.warmup_epochs = 10;
  EXPECT_EQ(LearningRateAt(c, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(LearningRateAt(c, 5.0), 0.75e-4);
  EXPECT_DOUBLE_EQ(LearningRateAt(c, 10.0), 1.5e-4);
  EXPECT_NEAR(LearningRateAt(c, 55.0), 0.75e-4, 1e-18);
  EXPECT_NEAR(LearningRateAt(c, 100.0), 0.0, 1e-20);
  for (double p = 10.0; p < 100.0; p += 1.0) {
    EXPECT_GE(LearningRateAt(c, p), LearningRateAt(c, p + 1.0));
  }
}

TEST(AdamWTest, FirstStepAndDecayExclusion) {
  ParamStore store;
  const auto w = store.Add("layer.weight", {2}, true);
  const auto b = store.Add("layer.bias", {2}, false);
  store.Values(w)[0] = 1.0;
  store.Values(w)[1] = -2.0;
  store.Values(b)[0] = 1.0;
  store.Values(b)[1] = 0.5;
  AdamW opt(store, 0.9, 0.95, 1e-8);
  const std::vector<double> grads = {0.5, -0.1, 0.0, 3.0};
  opt.Step(store, grads, 0.01, 0.1);
  // Bias-corrected first step moves each entry by lr * g / (|g| + eps);
  // only the weight entries shrink by lr * wd first.
  EXPECT_NEAR(store.Values(w)[0], 1.0 * (1 - 0.001) - 0.01, 1e-9);
  EXPECT_NEAR(store.Values(w)[1], -2.0 * (1 - 0.001) + 0.01, 1e-9);
  EXPECT_EQ(store.Values(b)[0], 1.0);
  EXPECT_NEAR(store.Values(b)[1], 0.5 - 0.01, 1e-9);
}

TEST(AdamWTest, ModelDecayFlagsCoverOnlyLinearWeights) {
  const MaeModel m(ModelConfig::Tiny());
  for (const ParamEntry& e : m.params().entries()) {
    const bool linear_weight =
        e.name.ends_with(".weight") && e.name.find("norm") == std::string::npos;
    EXPECT_EQ(e.decay, linear_weight) << e.name;
  }
}

TEST(GradCheckTest, TinyPresetTwentyParameters) {
  const GradCheckReport r = GradCheck(ModelConfig::Tiny(), 0, 20);
  ASSERT_EQ(r.entries.size(), 20u);
  for (const GradCheckEntry& e : r.entries) {
    EXPECT_LT(e.relative_error, 1e-3)
        << e.name << "[" << e.index << "] analytic " << e.analytic
        << " numeric " << e.numeric;
  }
  EXPECT_LT(r.max_relative_error, 1e-3);
}

// Independent finite differences over two elements of every tensor.
TEST(GradCheckTest, EveryTensorAgreesWithFiniteDifferences) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel model = MaeModel::Init(c, 5);
  const Image img = SynthHealthy(5, c.resolution);
  const MaskTemplate mask = SampleMask(c.num_patches(), 0.35, 6);
  std::vector<double> grads(model.params().total_size(), 0.0);
  model.LossAndGradient(img, mask, 1.0, grads);

  MaeModel probe = model;
  auto& values = probe.params().flat();
  const double h = 1e-5;
  for (const ParamEntry& e : model.params().entries()) {
    for (size_t k : {size_t{0}, e.size / 2 + 1}) {
      if (k >= e.size) continue;
      const size_t idx = e.offset + k;
      const double original = values[idx];
      values[idx] = original + h;
      const double plus = probe.Loss(img, mask);
      values[idx] = original - h;
      const double minus = probe.Loss(img, mask);
      values[idx] = original;
      const double numeric = (plus - minus) / (2 * h);
      EXPECT_LT(GradRelativeError(grads[idx], numeric), 1e-3)
          << e.name << "[" << k << "] analytic " << grads[idx] << " numeric "
          << numeric;
    }
  }
}

// With a zero image and an all-zero output weight matrix the prediction is
// the output bias in every patch, so dL/db_j = 2 b_j / patch_dim.
TEST(GradCheckTest, OutputBiasOnZeroImageZeroHead) {
  const ModelConfig c = ModelConfig::Tiny();
  MaeModel model = MaeModel::Init(c, 2);
  for (double& v : model.params().Values(model.output_weight_id())) v = 0.0;
  auto bias = model.params().Values(model.output_bias_id());
  Rng rng(3);
  for (double& v : bias) v = rng.Uniform(-0.5, 0.5);
  const Image zero(c.channels, c.resolution, c.resolution, 0.0);
  const MaskTemplate mask = SampleMask(c.num_patches(), 0.35, 1);
  std::vector<double> grads(model.params().total_size(), 0.0);
  model.LossAndGradient(zero, mask, 1.0, grads);

  const auto& e = model.params().entry(model.output_bias_id());
  MaeModel probe = model;
  auto& values = probe.params().flat();
  for (size_t j = 0; j < e.size; ++j) {
    const double closed_form = 2.0 * bias[j] / c.patch_dim();
    EXPECT_NEAR(grads[e.offset + j], closed_form, 1e-15);
    const double h = 1e-4;
    values[e.offset + j] = bias[j] + h;
    const double plus = probe.Loss(zero, mask);
    values[e.offset + j] = bias[j] - h;
    const double minus = probe.Loss(zero, mask);
    values[e.offset + j] = bias[j];
    EXPECT_NEAR((plus - minus) / (2 * h), closed_form, 1e-11);
  }
  // Nothing upstream of the zero head receives gradient.
  const auto& w = model.params().entry(model.output_weight_id());
  for (size_t i = 0; i < w.offset; ++i) ASSERT_EQ(grads[i], 0.0) << i;
}

// A masked pixel never reaches the encoder, so the loss depends on it only
// through the target term: dL/dx = -2 (pred - x) / num_elements.
TEST(GradCheckTest, MaskedPixelEntersOnlyThroughTarget) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel model = MaeModel::Init(c, 8);
  const MaskTemplate mask = SampleMask(c.num_patches(), 0.35, 2);
  Image img = SynthHealthy(8, c.resolution);
  int t = 0;
  while (!mask.masked[t]) ++t;
  const int y = (t / c.grid_size()) * c.patch_size + 3;
  const int x = (t % c.grid_size()) * c.patch_size + 2;
  const double pred = model.Decode(model.Encode(img, mask), mask).at(1, y, x);
  const double x0 = img.at(1, y, x);
  const double h = 1e-4;
  img.at(1, y, x) = x0 + h;
  const double plus = model.Loss(img, mask);
  img.at(1, y, x) = x0 - h;
  const double minus = model.Loss(img, mask);
  EXPECT_NEAR((plus - minus) / (2 * h), -2.0 * (pred - x0) / img.size(), 1e-12);
}

TEST(GradRelativeErrorTest, FloorAppliesToTinyValues) {
  EXPECT_NEAR(GradRelativeError(1.0, 1.001), 0.001 / 1.001, 1e-15);
  EXPECT_DOUBLE_EQ(GradRelativeError(1e-12, 0.0), 1e-12 / 1e-7);
  EXPECT_EQ(GradRelativeError(0.0, 0.0), 0.0);
}

TEST(TrainTest, LossDecreasesAndIsFinite) {
  const ModelConfig c = ModelConfig::Tiny();
  const auto images = HealthySet(8, c.resolution);
  const TrainResult r = TrainOnImages(images, c, QuickConfig(4));
  ASSERT_EQ(r.epoch_losses.size(), 4u);
  EXPECT_EQ(r.steps.size(), 8u);
  for (const LossRecord& s : r.steps) EXPECT_TRUE(std::isfinite(s.loss));
  EXPECT_LT(r.epoch_losses.back(), r.epoch_losses.front());
}

TEST(TrainTest, DeterministicLossCurve) {
  const ModelConfig c = ModelConfig::Tiny();
  const auto images = HealthySet(6, c.resolution);
  TrainConfig t = QuickConfig(2);
  t.seed = 17;
  const TrainResult a = TrainOnImages(images, c, t);
  const TrainResult b = TrainOnImages(images, c, t);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].loss, b.steps[i].loss);
  }
  EXPECT_EQ(a.model.params().flat(), b.model.params().flat());
}

TEST(TrainTest, WritesCheckpointAndLossLog) {
  const ModelConfig c = ModelConfig::Tiny();
  const fs::path dir = fs::path(testing::TempDir()) / "train_out";
  fs::create_directories(dir);
  TrainOptions opt;
  opt.checkpoint_path = dir / "m.ckpt";
  opt.loss_log_path = dir / "loss.csv";
  int callbacks = 0;
  opt.on_epoch = [&](int, double) { ++callbacks; };
  const TrainResult r =
      TrainOnImages(HealthySet(4, c.resolution), c, QuickConfig(2), opt);
  EXPECT_EQ(callbacks, 2);
  EXPECT_EQ(LoadCheckpoint(dir / "m.ckpt").model.params().flat(),
            r.model.params().flat());
  std::ifstream in(dir / "loss.csv");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 1 + static_cast<int>(r.steps.size()));
}

TEST(TrainTest, DivergenceKeepsLastGoodCheckpoint) {
  const ModelConfig c = ModelConfig::Tiny();
  const fs::path path = fs::path(testing::TempDir()) / "diverged.ckpt";
  fs::remove(path);
  TrainConfig t = QuickConfig(30);
  t.learning_rate = 1e200;
  t.warmup_epochs = 0;
  TrainOptions opt;
  opt.checkpoint_path = path;
  EXPECT_THROW(TrainOnImages(HealthySet(4, c.resolution), c, t, opt),
               DivergenceError);
  ASSERT_TRUE(fs::exists(path));
  // The saved parameters are the state before the failing step.
  const Checkpoint ck = LoadCheckpoint(path);
  for (double v : ck.model.params().flat()) ASSERT_TRUE(std::isfinite(v));
}

TEST(TrainTest, RejectsAnomalousTrainingEntries) {
  DatasetManifest m;
  m.entries = {
      {"a.png", fs::path("a_gt.png"), Split::kTest, Label::kAnomalous}};
  m.entries[0].split = Split::kTrain;
  EXPECT_THROW(Train(m, ModelConfig::Tiny(), QuickConfig(1)),
               ContractViolation);
}

TEST(TrainTest, InvalidConfigThrows) {
  TrainConfig t;
  t.masking_ratio = 1.0;
  EXPECT_THROW(t.Validate(), ConfigError);
  t = TrainConfig{};
  t.batch_size = 0;
  EXPECT_THROW(t.Validate(), ConfigError);
  EXPECT_THROW(TrainOnImages({}, ModelConfig::Tiny(), TrainConfig{}),
               EmptyCorpusError);
}

}  // namespace
}  // namespace oodmae
