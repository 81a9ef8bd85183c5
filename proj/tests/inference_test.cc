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
#include <fstream>

#include <gtest/gtest.h>

#include "oodmae/corpus.h"
#include "oodmae/error.h"
#include "oodmae/random.h"
#include "oodmae/trainer.h"

namespace oodmae {
namespace {

namespace fs = std::filesystem;

ScoreMap RandomMap(int h, int w, uint64_t seed) {
  ScoreMap m(h, w);
  Rng rng(seed);
  for (double& v : m.data) v = rng.Uniform();
  return m;
}

InferenceConfig Cfg(int samples = 1, uint64_t seed = 0) {
  InferenceConfig c;
  c.num_mask_samples = samples;
  c.mask_seed = seed;
  return c;
}

TEST(ReconstructTest, Deterministic) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel m = MaeModel::Init(c, 1);
  const Image img = SynthHealthy(2, c.resolution);
  const LatentStats id = LatentStats::Identity(c.embed_dim);
  EXPECT_EQ(ReconstructOod(img, m, id, Cfg(3, 5)),
            ReconstructOod(img, m, id, Cfg(3, 5)));
  EXPECT_NE(ReconstructOod(img, m, id, Cfg(1, 5)),
            ReconstructOod(img, m, id, Cfg(1, 6)));
}

TEST(ReconstructTest, IdentityStatsEqualPlainDecode) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel m = MaeModel::Init(c, 4);
  const Image img = SynthHealthy(3, c.resolution);
  const InferenceConfig cfg = Cfg(1, 9);
  const MaskTemplate mask = SampleMask(c.num_patches(), cfg.masking_ratio,
                                       InferenceMaskSeed(cfg.mask_seed, 0));
  Image plain = m.Decode(m.Encode(img, mask), mask);
  for (double& v : plain.data) v = std::clamp(v, 0.0, 1.0);
  EXPECT_EQ(ReconstructOod(img, m, LatentStats::Identity(c.embed_dim), cfg),
            plain);
}

TEST(ReconstructTest, OutputInUnitRange) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel m = MaeModel::Init(c, 4);
  LatentStats st = LatentStats::Identity(c.embed_dim);
  for (double& s : st.std) s = 1e-3;  // blows latents up
  const Image r = ReconstructOod(SynthHealthy(0, c.resolution), m, st, Cfg(2));
  for (double v : r.data) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(ReconstructTest, StatsShapeMismatchThrows) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel m = MaeModel::Init(c, 4);
  const Image img = SynthHealthy(0, c.resolution);
  EXPECT_THROW(ReconstructOod(img, m, LatentStats::Identity(32), Cfg()),
               ShapeError);
  LatentStats grid = LatentStats::Identity(c.embed_dim);
  grid.positions = 10;
  EXPECT_THROW(ReconstructOod(img, m, grid, Cfg()), ShapeError);
  InferenceConfig bad = Cfg(0);
  EXPECT_THROW(ReconstructOod(img, m, LatentStats::Identity(c.embed_dim), bad),
               ConfigError);
}

// Averaging K reconstructions over independent masks lowers the spread of a
// pixel across mask seeds.
TEST(ReconstructTest, MoreMaskSamplesReduceVariance) {
  const ModelConfig c = ModelConfig::Tiny();
  const MaeModel m = MaeModel::Init(c, 7);
  const Image img = SynthHealthy(5, c.resolution);
  const LatentStats id = LatentStats::Identity(c.embed_dim);
  auto spread = [&](int k) {
    std::vector<Image> draws;
    for (uint64_t s = 0; s < 20; ++s) {
      draws.push_back(ReconstructOod(img, m, id, Cfg(k, DeriveSeed(100, s))));
    }
    double total = 0;
    for (size_t i = 0; i < img.size(); ++i) {
      double mean = 0, sq = 0;
      for (const Image& d : draws) mean += d.data[i];
      mean /= draws.size();
      for (const Image& d : draws) {
        sq += (d.data[i] - mean) * (d.data[i] - mean);
      }
      total += sq / draws.size();
    }
    return total / img.size();
  };
  EXPECT_LT(spread(8), spread(1));
}

TEST(ScoreTest, PerfectReconstructionGivesZeroMap) {
  const Image img = SynthHealthy(1, 32);
  for (double v : AnomalyScore(img, img, 8).data) EXPECT_EQ(v, 0.0);
}

TEST(ScoreTest, ConstantDifferenceSurvivesPooling) {
  const Image img(3, 24, 24, 0.2), recon(3, 24, 24, 0.45);
  for (double v : AnomalyScore(img, recon, 5).data) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(ScoreTest, SymmetricInArguments) {
  const Image a = SynthHealthy(1, 32), b = SynthHealthy(2, 32);
  EXPECT_EQ(AnomalyScore(a, b, 4), AnomalyScore(b, a, 4));
}

TEST(ScoreTest, ChannelMeanOfAbsoluteDifference) {
  Image a(3, 2, 2, 0.0), b(3, 2, 2, 0.0);
  b.at(0, 1, 0) = 0.3;
  b.at(2, 1, 0) = -0.6;
  const ScoreMap d = DifferenceMap(a, b);
  EXPECT_NEAR(d.at(1, 0), 0.3, 1e-15);
  EXPECT_EQ(d.at(0, 0), 0.0);
  EXPECT_THROW(DifferenceMap(a, Image(3, 2, 3)), ShapeError);
}

TEST(ScoreTest, PooledMaxNeverExceedsRawMax) {
  const Image a = SynthHealthy(3, 64), b = SynthAnomalous(3, 64).image;
  const ScoreMap raw = DifferenceMap(a, b), pooled = AnomalyScore(a, b, 8);
  EXPECT_LE(*std::max_element(pooled.data.begin(), pooled.data.end()),
            *std::max_element(raw.data.begin(), raw.data.end()));
}

TEST(ScoreTest, KernelResolvesToPatchSize) {
  const Image a = SynthHealthy(3, 64), b = SynthAnomalous(3, 64).image;
  InferenceConfig cfg;
  EXPECT_EQ(AnomalyScore(a, b, cfg, 8), AnomalyScore(a, b, 8));
  cfg.pool_kernel = 3;
  EXPECT_EQ(AnomalyScore(a, b, cfg, 8), AnomalyScore(a, b, 3));
  EXPECT_THROW(AnomalyScore(a, b, 0), ValueError);
}

TEST(NormaliseTest, Examples) {
  ScoreMap m(1, 3);
  m.data = {2.0, 4.0, 3.0};
  EXPECT_EQ(NormaliseMap(m).data, (std::vector<double>{0.0, 1.0, 0.5}));
  for (double v : NormaliseMap(ScoreMap(4, 4, 0.7)).data) EXPECT_EQ(v, 0.0);
}

TEST(NormaliseTest, MonotoneAndInUnitRange) {
  const ScoreMap m = RandomMap(16, 16, 3);
  const ScoreMap n = NormaliseMap(m);
  for (size_t i = 0; i < m.size(); ++i) {
    ASSERT_GE(n.data[i], 0.0);
    ASSERT_LE(n.data[i], 1.0);
    for (size_t j = 0; j < m.size(); ++j) {
      if (m.data[i] < m.data[j]) ASSERT_LE(n.data[i], n.data[j]);
    }
  }
}

TEST(RawMapTest, RoundTripIsBitExact) {
  const fs::path dir = testing::TempDir();
  const ScoreMap m = RandomMap(13, 7, 4);
  SaveRawMap(dir / "m.map", m);
  EXPECT_EQ(LoadRawMap(dir / "m.map"), m);
  EXPECT_THROW(LoadRawMap(dir / "absent.map"), IoError);
  std::ofstream(dir / "bad.map") << "OODMAP01xx";
  EXPECT_THROW(LoadRawMap(dir / "bad.map"), DecodeError);
}

// A briefly trained model reconstructs healthy images better than images
// with an injected anomaly.
TEST(TrainedModelTest, AnomaliesScoreHigherThanHealthy) {
  const ModelConfig c = ModelConfig::Tiny();
  std::vector<Image> train;
  for (int i = 0; i < 40; ++i) {
    train.push_back(SynthHealthy(DeriveSeed(1, i), c.resolution));
  }
  TrainConfig t;
  t.epochs = 20;
  t.batch_size = 8;
  t.learning_rate = 1e-3;
  t.warmup_epochs = 2;
  const TrainResult r = TrainOnImages(train, c, t);
  const LatentStats st =
      ComputeModelStats(r.model, train, 0.35, 0, StatsGranularity::kChannel);
  double healthy = 0, anomalous = 0;
  for (int i = 0; i < 50; ++i) {
    const uint64_t s = DeriveSeed(2, i);
    const Image h = SynthHealthy(s, c.resolution);
    const Image a = SynthAnomalous(s, c.resolution).image;
    auto mean_score = [&](const Image& img) {
      const ScoreMap m =
          AnomalyScore(img, ReconstructOod(img, r.model, st, Cfg(1, s)), 8);
      double sum = 0;
      for (double v : m.data) sum += v;
      return sum / m.size();
    };
    healthy += mean_score(h);
    anomalous += mean_score(a);
  }
  EXPECT_GT(anomalous, healthy);
}

}  // namespace
}  // namespace oodmae
