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

#include "oodmae/commands.h"

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>

#include "oodmae/corpus.h"
#include "oodmae/error.h"
#include "oodmae/inference.h"
#include "oodmae/mae_model.h"
#include "oodmae/plot.h"
#include "oodmae/random.h"

namespace oodmae {

namespace fs = std::filesystem;

namespace {

void MakeDirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string Indexed(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d", prefix, i);
  return buf;
}

std::string RatioTag(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ratio_%.2f", r);
  return buf;
}

// Runs body(i) for i in [0, n) across threads; rethrows the first failure
// (lowest index) on the calling thread.
template <typename Fn>
void ParallelFor(size_t n, Fn body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Image> LoadTrainImages(const DatasetManifest& manifest,
                                   int resolution) {
  const std::vector<ManifestEntry> train = manifest.Select(Split::kTrain);
  for (const ManifestEntry& e : train) {
    if (e.label != Label::kHealthy) {
      throw ContractViolation("training entry " + e.image_path.string() +
                              " is not healthy");
    }
  }
  if (train.empty()) throw EmptyCorpusError("manifest has no train entries");
  std::vector<Image> images(train.size());
  ParallelFor(train.size(), [&](size_t i) {
    images[i] = LoadImage(train[i].image_path, resolution);
  });
  return images;
}

// Ids name the output files, so they must not collide.
void CheckUniqueIds(const DatasetManifest& manifest) {
  std::set<std::string> seen;
  for (const ManifestEntry& e : manifest.entries) {
    if (!seen.insert(e.Id()).second) {
      throw ContractViolation("duplicate image id '" + e.Id() +
                              "' in manifest");
    }
  }
}

}  // namespace

SynthCorpusResult CmdSynthCorpus(const RunConfig& cfg,
                                 const fs::path& out_dir) {
  cfg.Validate();
  WriteResolvedConfig(cfg);
  const int res = cfg.CorpusResolution();
  const fs::path train_dir = out_dir / "train" / "healthy";
  const fs::path test_healthy_dir = out_dir / "test" / "healthy";
  const fs::path anomalous_dir = out_dir / "test" / "anomalous";
  const fs::path mask_dir = anomalous_dir / "masks";
  MakeDirs(train_dir);
  MakeDirs(mask_dir);
  if (cfg.corpus.n_healthy_test > 0) MakeDirs(test_healthy_dir);

  const uint64_t train_seed = DeriveSeed(cfg.seed, 1);
  const uint64_t test_seed = DeriveSeed(cfg.seed, 2);
  const uint64_t anomalous_seed = DeriveSeed(cfg.seed, 3);

  DatasetManifest train, test;
  for (int i = 0; i < cfg.corpus.n_healthy; ++i) {
    train.entries.push_back({train_dir / (Indexed("healthy", i) + ".png"),
                             std::nullopt, Split::kTrain, Label::kHealthy});
  }
  for (int i = 0; i < cfg.corpus.n_healthy_test; ++i) {
    test.entries.push_back(
        {test_healthy_dir / (Indexed("healthy_test", i) + ".png"), std::nullopt,
         Split::kTest, Label::kHealthy});
  }
  for (int i = 0; i < cfg.corpus.n_anomalous; ++i) {
    const std::string name = Indexed("anomalous", i) + ".png";
    test.entries.push_back({anomalous_dir / name, mask_dir / name, Split::kTest,
                            Label::kAnomalous});
  }

  ParallelFor(train.entries.size(), [&](size_t i) {
    SaveImage(train.entries[i].image_path,
              SynthHealthy(DeriveSeed(train_seed, i), res));
  });
  const size_t n_test_healthy = cfg.corpus.n_healthy_test;
  ParallelFor(test.entries.size(), [&](size_t i) {
    const ManifestEntry& e = test.entries[i];
    if (i < n_test_healthy) {
      SaveImage(e.image_path, SynthHealthy(DeriveSeed(test_seed, i), res));
    } else {
      const AnomalousSample s =
          SynthAnomalous(DeriveSeed(anomalous_seed, i - n_test_healthy), res);
      SaveImage(e.image_path, s.image);
      SaveMask(*e.gt_path, s.mask);
    }
  });

  SynthCorpusResult result;
  result.train_manifest = out_dir / "train_manifest.tsv";
  result.test_manifest = out_dir / "test_manifest.tsv";
  if (!train.entries.empty()) {
    train.Validate();
    WriteManifest(result.train_manifest, train);
  }
  if (!test.entries.empty()) {
    test.Validate();
    WriteManifest(result.test_manifest, test);
  }
  result.images = static_cast<int>(train.entries.size() + test.entries.size());
  result.masks = cfg.corpus.n_anomalous;
  return result;
}

TrainSummary CmdTrain(const RunConfig& cfg) {
  cfg.Validate();
  WriteResolvedConfig(cfg);
  const DatasetManifest manifest = ReadManifest(cfg.TrainManifest());
  TrainOptions options;
  options.checkpoint_path = cfg.CheckpointPath();
  options.loss_log_path = cfg.LossLogPath();
  const int every = std::max(1, cfg.train.epochs / 10);
  options.on_epoch = [&](int epoch, double loss) {
    if ((epoch + 1) % every == 0 || epoch + 1 == cfg.train.epochs) {
      std::cerr << "epoch " << epoch + 1 << "/" << cfg.train.epochs << " loss "
                << loss << '\n';
    }
  };
  const TrainResult result = Train(manifest, cfg.model, cfg.train, options);
  TrainSummary summary;
  summary.checkpoint = cfg.CheckpointPath();
  summary.loss_log = cfg.LossLogPath();
  summary.images = static_cast<int>(manifest.Select(Split::kTrain).size());
  summary.steps = static_cast<int>(result.steps.size());
  summary.final_epoch_loss =
      result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back();
  return summary;
}

LatentStats CmdStats(const RunConfig& cfg, const fs::path& checkpoint) {
  cfg.Validate();
  WriteResolvedConfig(cfg);
  if (!fs::is_regular_file(checkpoint)) {
    throw IoError("checkpoint " + checkpoint.string() + " does not exist");
  }
  const Checkpoint ck = LoadCheckpoint(checkpoint);
  const DatasetManifest manifest = ReadManifest(cfg.TrainManifest());
  const std::vector<Image> images =
      LoadTrainImages(manifest, ck.model.config().resolution);
  const LatentStats stats =
      ComputeModelStats(ck.model, images, cfg.inference.masking_ratio, cfg.seed,
                        cfg.stats.granularity, cfg.stats.epsilon);
  SaveStats(cfg.StatsPath(), stats);
  return stats;
}

int CmdInfer(const RunConfig& cfg, const fs::path& checkpoint,
             const std::optional<fs::path>& stats_path,
             const fs::path& manifest_path, const fs::path& maps_dir) {
  cfg.Validate();
  WriteResolvedConfig(cfg);
  if (!fs::is_regular_file(checkpoint)) {
    throw IoError("checkpoint " + checkpoint.string() + " does not exist");
  }
  const Checkpoint ck = LoadCheckpoint(checkpoint);
  const ModelConfig& mc = ck.model.config();
  LatentStats stats = LatentStats::Identity(mc.embed_dim);
  if (stats_path) {
    if (!fs::is_regular_file(*stats_path)) {
      throw IoError("stats file " + stats_path->string() + " does not exist");
    }
    stats = LoadStats(*stats_path);
    if (stats.dim != mc.embed_dim ||
        (stats.positions != 1 && stats.positions != mc.num_patches())) {
      throw ShapeError("stats file " + stats_path->string() + " is " +
                       std::to_string(stats.positions) + "x" +
                       std::to_string(stats.dim) + " but checkpoint " +
                       checkpoint.string() + " has " +
                       std::to_string(mc.num_patches()) + " patches of width " +
                       std::to_string(mc.embed_dim));
    }
  }
  const DatasetManifest manifest = ReadManifest(manifest_path);
  CheckUniqueIds(manifest);
  MakeDirs(maps_dir);
  InferenceConfig icfg = cfg.inference;
  icfg.stats_mode = stats.granularity;
  const auto& entries = manifest.entries;
  ParallelFor(entries.size(), [&](size_t i) {
    const Image img = LoadImage(entries[i].image_path, mc.resolution);
    const Image recon = ReconstructOod(img, ck.model, stats, icfg);
    const ScoreMap score = AnomalyScore(img, recon, icfg, mc.patch_size);
    const std::string id = entries[i].Id();
    SaveGrayMap(maps_dir / (id + ".png"), NormaliseMap(score));
    if (cfg.write_raw_maps) SaveRawMap(maps_dir / (id + ".map"), score);
  });
  return static_cast<int>(entries.size());
}

MetricsReport CmdEval(const RunConfig& cfg, const fs::path& maps_dir,
                      const fs::path& manifest_path, const fs::path& out_dir) {
  WriteResolvedConfig(cfg);
  const DatasetManifest manifest = ReadManifest(manifest_path);
  CheckUniqueIds(manifest);
  std::vector<std::string> missing;
  for (const ManifestEntry& e : manifest.entries) {
    if (!fs::is_regular_file(maps_dir / (e.Id() + ".png"))) {
      missing.push_back(e.Id());
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& id : missing) {
      list += (list.empty() ? "" : ", ") + id;
    }
    throw IoError("missing anomaly maps in " + maps_dir.string() + " for " +
                  std::to_string(missing.size()) + " id(s): " + list);
  }
  std::vector<EvalItem> items(manifest.entries.size());
  ParallelFor(items.size(), [&](size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    EvalItem& item = items[i];
    item.id = e.Id();
    item.map = LoadGrayMap(maps_dir / (e.Id() + ".png"));
    if (item.map.height != item.map.width) {
      throw ShapeError("map for " + e.Id() + " is not square");
    }
    item.gt = e.gt_path ? LoadMask(*e.gt_path, item.map.height)
                        : BinaryMask(item.map.height, item.map.width, 0);
  });
  const MetricsReport report = EvaluateDataset(items);
  WriteReport(out_dir, report);
  return report;
}

MetricsRow RowFromReport(const MetricsReport& report) {
  return MetricsRow{report.mean_max_spe, report.mean_s_alpha,
                    report.mean_max_ephi, report.mean_auroc};
}

std::vector<MaskSweepRow> CmdAblateMask(const RunConfig& cfg,
                                        const std::vector<double>& ratios) {
  cfg.Validate();
  WriteResolvedConfig(cfg);
  if (ratios.empty()) throw ConfigError("no masking ratios to sweep");
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) {
      throw ConfigError("masking ratios must lie in (0, 1)");
    }
  }
  const fs::path root = cfg.run_dir / "ablate_mask";
  std::vector<MaskSweepRow> rows;
  for (double r : ratios) {
    RunConfig sub = cfg;
    sub.run_dir = root / RatioTag(r);
    sub.corpus.dir = cfg.CorpusDir();
    sub.corpus.train_manifest = cfg.TrainManifest();
    sub.corpus.test_manifest = cfg.TestManifest();
    sub.train.masking_ratio = r;
    sub.inference.masking_ratio = r;
    std::cerr << "ablate-mask: ratio " << r << '\n';
    CmdTrain(sub);
    CmdStats(sub, sub.CheckpointPath());
    const std::optional<fs::path> stats =
        sub.standardise ? std::optional<fs::path>(sub.StatsPath())
                        : std::nullopt;
    CmdInfer(sub, sub.CheckpointPath(), stats, sub.TestManifest(),
             sub.MapsDir());
    const MetricsReport report =
        CmdEval(sub, sub.MapsDir(), sub.TestManifest(), sub.EvalDir());
    rows.push_back({r, RowFromReport(report)});
  }

  {
    std::ofstream out(root / "sweep.csv");
    if (!out) throw IoError("cannot write " + (root / "sweep.csv").string());
    out.precision(10);
    out << "ratio,spe,s_alpha,e_phi,auroc\n";
    for (const MaskSweepRow& row : rows) {
      out << row.ratio << ',' << row.metrics.spe << ',' << row.metrics.s_alpha
          << ',' << row.metrics.e_phi << ',' << row.metrics.auroc << '\n';
    }
  }
  LineChart chart;
  chart.title = "metrics vs masking ratio";
  chart.series = {{"spe", {}}, {"s_alpha", {}}, {"e_phi", {}}, {"auroc", {}}};
  for (const MaskSweepRow& row : rows) {
    chart.x.push_back(row.ratio);
    chart.series[0].y.push_back(row.metrics.spe);
    chart.series[1].y.push_back(row.metrics.s_alpha);
    chart.series[2].y.push_back(row.metrics.e_phi);
    chart.series[3].y.push_back(row.metrics.auroc);
  }
  WriteLineChartPng(root / "sweep.png", chart);
  return rows;
}

StandardiseAblation CmdAblateStandardise(const RunConfig& cfg,
                                         const fs::path& checkpoint,
                                         const fs::path& stats,
                                         const fs::path& manifest) {
  cfg.Validate();
  WriteResolvedConfig(cfg);
  const fs::path root = cfg.run_dir / "ablate_standardise";
  auto run = [&](const char* variant, const std::optional<fs::path>& s) {
    RunConfig sub = cfg;
    sub.run_dir = root / variant;
    sub.standardise = s.has_value();
    CmdInfer(sub, checkpoint, s, manifest, sub.MapsDir());
    return RowFromReport(CmdEval(sub, sub.MapsDir(), manifest, sub.EvalDir()));
  };
  StandardiseAblation result;
  result.with = run("with", stats);
  result.without = run("without", std::nullopt);
  result.delta = {result.with.spe - result.without.spe,
                  result.with.s_alpha - result.without.s_alpha,
                  result.with.e_phi - result.without.e_phi,
                  result.with.auroc - result.without.auroc};
  std::ofstream out(root / "comparison.csv");
  if (!out) throw IoError("cannot write " + (root / "comparison.csv").string());
  out.precision(10);
  out << "variant,spe,s_alpha,e_phi,auroc\n";
  auto line = [&](const char* name, const MetricsRow& r) {
    out << name << ',' << r.spe << ',' << r.s_alpha << ',' << r.e_phi << ','
        << r.auroc << '\n';
  };
  line("with", result.with);
  line("without", result.without);
  line("delta", result.delta);
  return result;
}

}  // namespace oodmae
