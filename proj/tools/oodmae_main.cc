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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oodmae/commands.h"
#include "oodmae/corpus.h"
#include "oodmae/error.h"
#include "oodmae/run_config.h"

namespace fs = std::filesystem;
using namespace oodmae;

namespace {

constexpr int kExitContract = 2;
constexpr int kExitIo = 3;
constexpr int kExitDiverged = 4;

struct GlobalFlags {
  std::string config;
  std::string run_dir;
  std::optional<uint64_t> seed;
  std::string preset;
  bool no_standardise = false;
  std::optional<double> mask_ratio;
  std::optional<int> mask_samples;
};

RunConfig Resolve(const GlobalFlags& flags) {
  RunConfig cfg =
      flags.config.empty() ? RunConfig{} : LoadRunConfig(flags.config);
  if (!flags.run_dir.empty()) cfg.run_dir = flags.run_dir;
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.preset.empty()) {
    cfg.preset = flags.preset;
    cfg.model = ModelConfig::Preset(flags.preset);
  }
  if (flags.no_standardise) cfg.standardise = false;
  if (flags.mask_ratio) {
    cfg.train.masking_ratio = *flags.mask_ratio;
    cfg.inference.masking_ratio = *flags.mask_ratio;
  }
  if (flags.mask_samples) cfg.inference.num_mask_samples = *flags.mask_samples;
  cfg.PropagateSeed();
  cfg.Validate();
  return cfg;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kDecode: return kExitIo;
    case ErrorCode::kDivergence: return kExitDiverged;
    default: return kExitContract;
  }
}

void PrintRow(const char* name, const MetricsRow& r) {
  std::cout << name << ": spe=" << r.spe << " s_alpha=" << r.s_alpha
            << " e_phi=" << r.e_phi << " auroc=" << r.auroc << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked-autoencoder out-of-distribution polyp segmentation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "JSON run configuration");
  app.add_option("--run-dir", flags.run_dir, "Directory for all outputs");
  app.add_option("--seed", flags.seed, "Master seed");
  app.add_option("--preset", flags.preset, "Model preset")
      ->check(CLI::IsMember({"tiny", "base"}));
  app.add_flag("--no-standardise", flags.no_standardise,
               "Use identity latent statistics at inference");
  app.add_option("--mask-ratio", flags.mask_ratio,
                 "Masking ratio for training and inference");
  app.add_option("--mask-samples", flags.mask_samples,
                 "Mask draws averaged per image at inference");

  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic corpus");
  std::optional<int> n_healthy, n_anomalous, n_healthy_test;
  std::string synth_out;
  synth->add_option("--n-healthy", n_healthy, "Healthy training images");
  synth->add_option("--n-anomalous", n_anomalous, "Anomalous test images");
  synth->add_option("--n-healthy-test", n_healthy_test,
                    "Healthy images in the test split");
  synth->add_option("--out", synth_out,
                    "Output directory (default: corpus dir)");

  auto* manifest_cmd = app.add_subcommand(
      "build-manifest", "Index a directory of frame sequences");
  std::string root_dir, manifest_out, split_name = "train";
  int sample_rate = 1;
  manifest_cmd->add_option("--root", root_dir, "Sequence root")->required();
  manifest_cmd->add_option("--split", split_name, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  manifest_cmd->add_option("--rate", sample_rate, "Keep every n-th frame");
  manifest_cmd->add_option("--out", manifest_out, "Manifest path")->required();

  auto* train = app.add_subcommand("train", "Train the autoencoder");

  std::string checkpoint, stats_path, manifest, maps_dir, out_dir;
  auto* stats = app.add_subcommand("stats", "Compute latent statistics");
  stats->add_option("--checkpoint", checkpoint, "Model checkpoint");

  auto* infer = app.add_subcommand("infer", "Write anomaly maps");
  infer->add_option("--checkpoint", checkpoint, "Model checkpoint");
  infer->add_option("--stats", stats_path, "Latent statistics");
  infer->add_option("--manifest", manifest, "Test manifest");
  infer->add_option("--maps", maps_dir, "Output map directory");

  auto* eval = app.add_subcommand("eval", "Score anomaly maps");
  eval->add_option("--maps", maps_dir, "Map directory");
  eval->add_option("--manifest", manifest, "Test manifest");
  eval->add_option("--out", out_dir, "Report directory");

  auto* ablate_mask =
      app.add_subcommand("ablate-mask", "Sweep the masking ratio");
  std::vector<double> ratios;
  ablate_mask->add_option("--ratios", ratios, "Ratios in (0, 1)")
      ->delimiter(',');

  auto* ablate_std = app.add_subcommand(
      "ablate-standardise", "Compare inference with and without statistics");
  ablate_std->add_option("--checkpoint", checkpoint, "Model checkpoint");
  ablate_std->add_option("--stats", stats_path, "Latent statistics");
  ablate_std->add_option("--manifest", manifest, "Test manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitContract;
  }

  auto or_default = [](const std::string& s, const fs::path& fallback) {
    return s.empty() ? fallback : fs::path(s);
  };

  try {
    RunConfig cfg = Resolve(flags);
    if (*synth) {
      if (n_healthy) cfg.corpus.n_healthy = *n_healthy;
      if (n_anomalous) cfg.corpus.n_anomalous = *n_anomalous;
      if (n_healthy_test) cfg.corpus.n_healthy_test = *n_healthy_test;
      if (!synth_out.empty()) cfg.corpus.dir = synth_out;
      const SynthCorpusResult r = CmdSynthCorpus(cfg, cfg.CorpusDir());
      std::cout << "wrote " << r.images << " images and " << r.masks
                << " masks; manifests " << r.train_manifest.string() << ", "
                << r.test_manifest.string() << '\n';
    } else if (*manifest_cmd) {
      const ManifestBuild build =
          BuildManifest(root_dir, sample_rate, ParseSplit(split_name));
      WriteManifest(manifest_out, build.manifest);
      std::cout << "indexed " << build.manifest.entries.size()
                << " frames, skipped " << build.skipped << '\n';
    } else if (*train) {
      const TrainSummary s = CmdTrain(cfg);
      std::cout << "trained on " << s.images << " images for " << s.steps
                << " steps; final epoch loss " << s.final_epoch_loss
                << "; checkpoint " << s.checkpoint.string() << '\n';
    } else if (*stats) {
      const LatentStats s =
          CmdStats(cfg, or_default(checkpoint, cfg.CheckpointPath()));
      std::cout << "stats over " << s.count << " tokens ("
                << GranularityName(s.granularity) << ", " << s.positions << "x"
                << s.dim << ") -> " << cfg.StatsPath().string() << '\n';
    } else if (*infer) {
      std::optional<fs::path> s;
      if (cfg.standardise) s = or_default(stats_path, cfg.StatsPath());
      const int n = CmdInfer(cfg, or_default(checkpoint, cfg.CheckpointPath()),
                             s, or_default(manifest, cfg.TestManifest()),
                             or_default(maps_dir, cfg.MapsDir()));
      std::cout << "wrote " << n << " anomaly maps"
                << (cfg.standardise ? "" : " (no standardisation)") << '\n';
    } else if (*eval) {
      const MetricsReport r = CmdEval(cfg, or_default(maps_dir, cfg.MapsDir()),
                                      or_default(manifest, cfg.TestManifest()),
                                      or_default(out_dir, cfg.EvalDir()));
      PrintRow("mean", RowFromReport(r));
      std::cout << "spe_at_best_ephi=" << r.mean_spe_at_best_ephi
                << " auroc_images=" << r.auroc_images << '\n';
    } else if (*ablate_mask) {
      const auto rows =
          CmdAblateMask(cfg, ratios.empty() ? cfg.ablation_ratios : ratios);
      for (const MaskSweepRow& row : rows) {
        PrintRow(("r=" + std::to_string(row.ratio)).c_str(), row.metrics);
      }
    } else if (*ablate_std) {
      const StandardiseAblation r = CmdAblateStandardise(
          cfg, or_default(checkpoint, cfg.CheckpointPath()),
          or_default(stats_path, cfg.StatsPath()),
          or_default(manifest, cfg.TestManifest()));
      PrintRow("with", r.with);
      PrintRow("without", r.without);
      PrintRow("delta", r.delta);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << ErrorCodeName(e.code()) << ": " << e.what()
              << '\n';
    return ExitCodeFor(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IOError: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
