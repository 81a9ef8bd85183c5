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

#ifndef OODMAE_COMMANDS_H_
#define OODMAE_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oodmae/latent_stats.h"
#include "oodmae/metrics.h"
#include "oodmae/run_config.h"

namespace oodmae {

// Every command writes <run_dir>/resolved_config.json before doing work.

struct SynthCorpusResult {
  std::filesystem::path train_manifest;
  std::filesystem::path test_manifest;
  int images = 0;
  int masks = 0;
};

// Layout under `out_dir`: train/healthy/*.png, test/healthy/*.png,
// test/anomalous/*.png with ground truth in test/anomalous/masks/, plus
// train_manifest.tsv and test_manifest.tsv.
SynthCorpusResult CmdSynthCorpus(const RunConfig& cfg,
                                 const std::filesystem::path& out_dir);

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_log;
  int images = 0;
  int steps = 0;
  double final_epoch_loss = 0.0;
};

TrainSummary CmdTrain(const RunConfig& cfg);

// One seeded mask draw per training image; writes cfg.StatsPath().
LatentStats CmdStats(const RunConfig& cfg,
                     const std::filesystem::path& checkpoint);

// Writes <maps_dir>/<id>.png (round(255 * normalised score)) and, when
// enabled, <maps_dir>/<id>.map with the raw pooled scores. `stats` empty
// means identity statistics. Returns the number of maps written.
int CmdInfer(const RunConfig& cfg, const std::filesystem::path& checkpoint,
             const std::optional<std::filesystem::path>& stats,
             const std::filesystem::path& manifest,
             const std::filesystem::path& maps_dir);

// Reads <maps_dir>/<id>.png for every test entry; ground truth is resized
// to the map size and healthy entries get an empty mask. Throws IoError
// listing every missing id.
MetricsReport CmdEval(const RunConfig& cfg,
                      const std::filesystem::path& maps_dir,
                      const std::filesystem::path& manifest,
                      const std::filesystem::path& out_dir);

struct MetricsRow {
  double spe = 0.0;
  double s_alpha = 0.0;
  double e_phi = 0.0;
  double auroc = 0.0;
};

MetricsRow RowFromReport(const MetricsReport& report);

struct MaskSweepRow {
  double ratio = 0.0;
  MetricsRow metrics;
};

// Per ratio: train, stats, infer and eval under
// <run_dir>/ablate_mask/ratio_<r>/, all with masking ratio r. Writes
// <run_dir>/ablate_mask/sweep.csv and sweep.png.
std::vector<MaskSweepRow> CmdAblateMask(const RunConfig& cfg,
                                        const std::vector<double>& ratios);

struct StandardiseAblation {
  MetricsRow with;
  MetricsRow without;
  MetricsRow delta;  // with - without
};

// Infers and evaluates twice from the same checkpoint, once with `stats`
// and once with identity statistics. Writes
// <run_dir>/ablate_standardise/comparison.csv.
StandardiseAblation CmdAblateStandardise(
    const RunConfig& cfg, const std::filesystem::path& checkpoint,
    const std::filesystem::path& stats, const std::filesystem::path& manifest);

}  // namespace oodmae

#endif  // OODMAE_COMMANDS_H_
