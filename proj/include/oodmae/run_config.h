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

#ifndef OODMAE_RUN_CONFIG_H_
#define OODMAE_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oodmae/inference.h"
#include "oodmae/latent_stats.h"
#include "oodmae/mae_model.h"
#include "oodmae/trainer.h"

namespace oodmae {

struct CorpusSettings {
  std::filesystem::path dir;  // empty: <run_dir>/corpus
  int n_healthy = 200;        // healthy training images
  int n_healthy_test = 0;     // healthy images added to the test split
  int n_anomalous = 50;       // anomalous test images
  int resolution = 0;         // 0: model resolution
  int sample_rate = 1;
  std::filesystem::path train_manifest;  // empty: <dir>/train_manifest.tsv
  std::filesystem::path test_manifest;   // empty: <dir>/test_manifest.tsv
};

struct StatsSettings {
  StatsGranularity granularity = StatsGranularity::kChannel;
  double epsilon = 1e-6;
};

// Everything a run needs. Precedence: built-in defaults, then the config
// file, then command-line overrides. `seed` drives corpus synthesis,
// initialisation, batching, stats masks and inference masks.
struct RunConfig {
  std::filesystem::path run_dir = "run";
  uint64_t seed = 0;
  std::string preset = "tiny";
  CorpusSettings corpus;
  ModelConfig model = ModelConfig::Tiny();
  TrainConfig train;
  StatsSettings stats;
  InferenceConfig inference;
  bool standardise = true;
  bool write_raw_maps = true;
  std::vector<double> ablation_ratios = {0.15, 0.35, 0.55, 0.75};

  std::filesystem::path CorpusDir() const;
  std::filesystem::path TrainManifest() const;
  std::filesystem::path TestManifest() const;
  std::filesystem::path CheckpointPath() const;
  std::filesystem::path LossLogPath() const;
  std::filesystem::path StatsPath() const;
  std::filesystem::path MapsDir() const;
  std::filesystem::path EvalDir() const;
  int CorpusResolution() const;

  // Copies `seed` into the sub-configs that carry their own seed field.
  void PropagateSeed();
  // Throws ConfigError.
  void Validate() const;
  nlohmann::json ToJson() const;
};

// Overlays the keys present in `j`; unknown keys and mistyped values throw
// ConfigError. A "preset" key resets the model before "model" overrides.
void ApplyJson(const nlohmann::json& j, RunConfig& cfg);

RunConfig LoadRunConfig(const std::filesystem::path& path);

// <run_dir>/resolved_config.json
void WriteResolvedConfig(const RunConfig& cfg);

}  // namespace oodmae

#endif  // OODMAE_RUN_CONFIG_H_
