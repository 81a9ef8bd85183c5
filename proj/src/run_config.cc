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

#include "oodmae/run_config.h"

#include <fstream>
#include <set>

#include "oodmae/error.h"

namespace oodmae {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path RunConfig::CorpusDir() const {
  return corpus.dir.empty() ? run_dir / "corpus" : corpus.dir;
}
fs::path RunConfig::TrainManifest() const {
  return corpus.train_manifest.empty() ? CorpusDir() / "train_manifest.tsv"
                                       : corpus.train_manifest;
}
fs::path RunConfig::TestManifest() const {
  return corpus.test_manifest.empty() ? CorpusDir() / "test_manifest.tsv"
                                      : corpus.test_manifest;
}
fs::path RunConfig::CheckpointPath() const { return run_dir / "model.ckpt"; }
fs::path RunConfig::LossLogPath() const { return run_dir / "loss_log.csv"; }
fs::path RunConfig::StatsPath() const { return run_dir / "latent_stats.bin"; }
fs::path RunConfig::MapsDir() const { return run_dir / "maps"; }
fs::path RunConfig::EvalDir() const { return run_dir / "eval"; }

int RunConfig::CorpusResolution() const {
  return corpus.resolution > 0 ? corpus.resolution : model.resolution;
}

void RunConfig::PropagateSeed() {
  train.seed = seed;
  inference.mask_seed = seed;
  inference.stats_mode = stats.granularity;
}

void RunConfig::Validate() const {
  model.Validate();
  train.Validate();
  inference.Validate();
  if (corpus.n_healthy < 0 || corpus.n_healthy_test < 0 ||
      corpus.n_anomalous < 0) {
    throw ConfigError("corpus image counts must be non-negative");
  }
  if (corpus.resolution < 0) {
    throw ConfigError("corpus.resolution must be >= 0");
  }
  if (corpus.sample_rate < 1) {
    throw ConfigError("corpus.sample_rate must be >= 1");
  }
  if (!(stats.epsilon > 0.0)) throw ConfigError("stats.epsilon must be > 0");
  for (double r : ablation_ratios) {
    if (!(r > 0.0 && r < 1.0)) {
      throw ConfigError("ablation ratios must lie in (0, 1)");
    }
  }
  if (run_dir.empty()) throw ConfigError("run_dir must not be empty");
}

json RunConfig::ToJson() const {
  json j;
  j["run_dir"] = run_dir.string();
  j["seed"] = seed;
  j["preset"] = preset;
  j["corpus"] = {
      {"dir", CorpusDir().string()},
      {"n_healthy", corpus.n_healthy},
      {"n_healthy_test", corpus.n_healthy_test},
      {"n_anomalous", corpus.n_anomalous},
      {"resolution", CorpusResolution()},
      {"sample_rate", corpus.sample_rate},
      {"train_manifest", TrainManifest().string()},
      {"test_manifest", TestManifest().string()},
  };
  j["model"] = {
      {"patch_size", model.patch_size},
      {"embed_dim", model.embed_dim},
      {"encoder_depth", model.encoder_depth},
      {"encoder_heads", model.encoder_heads},
      {"decoder_dim", model.decoder_dim},
      {"decoder_depth", model.decoder_depth},
      {"decoder_heads", model.decoder_heads},
      {"resolution", model.resolution},
      {"channels", model.channels},
      {"mlp_ratio", model.mlp_ratio},
  };
  j["train"] = {
      {"masking_ratio", train.masking_ratio},
      {"batch_size", train.batch_size},
      {"learning_rate", train.learning_rate},
      {"weight_decay", train.weight_decay},
      {"epochs", train.epochs},
      {"warmup_epochs", train.warmup_epochs},
      {"beta1", train.beta1},
      {"beta2", train.beta2},
      {"adam_eps", train.adam_eps},
  };
  j["stats"] = {
      {"granularity", GranularityName(stats.granularity)},
      {"epsilon", stats.epsilon},
  };
  j["inference"] = {
      {"masking_ratio", inference.masking_ratio},
      {"num_mask_samples", inference.num_mask_samples},
      {"pool_kernel",
       inference.pool_kernel > 0 ? inference.pool_kernel : model.patch_size},
      {"standardise", standardise},
      {"write_raw_maps", write_raw_maps},
  };
  j["ablation"] = {{"mask_ratios", ablation_ratios}};
  return j;
}

namespace {

void CheckKeys(const json& obj, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void Take(const json& obj, const char* key, const std::string& where, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, fs::path>) {
      out = it->template get<std::string>();
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) throw ConfigError("expected an integer");
      out = it->template get<T>();
    } else {
      out = it->template get<T>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad value for " + where + "." + key + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("bad value for " + where + "." + key + ": " + e.what());
  }
}

}  // namespace

void ApplyJson(const json& j, RunConfig& cfg) {
  CheckKeys(j, "config",
            {"run_dir", "seed", "preset", "corpus", "model", "train", "stats",
             "inference", "ablation"});
  Take(j, "run_dir", "config", cfg.run_dir);
  Take(j, "seed", "config", cfg.seed);
  if (j.contains("preset")) {
    Take(j, "preset", "config", cfg.preset);
    cfg.model = ModelConfig::Preset(cfg.preset);
  }
  if (const auto it = j.find("corpus"); it != j.end()) {
    const json& c = *it;
    CheckKeys(c, "corpus",
              {"dir", "n_healthy", "n_healthy_test", "n_anomalous",
               "resolution", "sample_rate", "train_manifest", "test_manifest"});
    Take(c, "dir", "corpus", cfg.corpus.dir);
    Take(c, "n_healthy", "corpus", cfg.corpus.n_healthy);
    Take(c, "n_healthy_test", "corpus", cfg.corpus.n_healthy_test);
    Take(c, "n_anomalous", "corpus", cfg.corpus.n_anomalous);
    Take(c, "resolution", "corpus", cfg.corpus.resolution);
    Take(c, "sample_rate", "corpus", cfg.corpus.sample_rate);
    Take(c, "train_manifest", "corpus", cfg.corpus.train_manifest);
    Take(c, "test_manifest", "corpus", cfg.corpus.test_manifest);
  }
  if (const auto it = j.find("model"); it != j.end()) {
    const json& m = *it;
    CheckKeys(m, "model",
              {"patch_size", "embed_dim", "encoder_depth", "encoder_heads",
               "decoder_dim", "decoder_depth", "decoder_heads", "resolution",
               "channels", "mlp_ratio"});
    Take(m, "patch_size", "model", cfg.model.patch_size);
    Take(m, "embed_dim", "model", cfg.model.embed_dim);
    Take(m, "encoder_depth", "model", cfg.model.encoder_depth);
    Take(m, "encoder_heads", "model", cfg.model.encoder_heads);
    Take(m, "decoder_dim", "model", cfg.model.decoder_dim);
    Take(m, "decoder_depth", "model", cfg.model.decoder_depth);
    Take(m, "decoder_heads", "model", cfg.model.decoder_heads);
    Take(m, "resolution", "model", cfg.model.resolution);
    Take(m, "channels", "model", cfg.model.channels);
    Take(m, "mlp_ratio", "model", cfg.model.mlp_ratio);
  }
  if (const auto it = j.find("train"); it != j.end()) {
    const json& t = *it;
    CheckKeys(t, "train",
              {"masking_ratio", "batch_size", "learning_rate", "weight_decay",
               "epochs", "warmup_epochs", "beta1", "beta2", "adam_eps"});
    Take(t, "masking_ratio", "train", cfg.train.masking_ratio);
    Take(t, "batch_size", "train", cfg.train.batch_size);
    Take(t, "learning_rate", "train", cfg.train.learning_rate);
    Take(t, "weight_decay", "train", cfg.train.weight_decay);
    Take(t, "epochs", "train", cfg.train.epochs);
    Take(t, "warmup_epochs", "train", cfg.train.warmup_epochs);
    Take(t, "beta1", "train", cfg.train.beta1);
    Take(t, "beta2", "train", cfg.train.beta2);
    Take(t, "adam_eps", "train", cfg.train.adam_eps);
  }
  if (const auto it = j.find("stats"); it != j.end()) {
    const json& s = *it;
    CheckKeys(s, "stats", {"granularity", "epsilon"});
    std::string granularity = GranularityName(cfg.stats.granularity);
    Take(s, "granularity", "stats", granularity);
    try {
      cfg.stats.granularity = ParseGranularity(granularity);
    } catch (const ValueError& e) {
      throw ConfigError(e.what());
    }
    Take(s, "epsilon", "stats", cfg.stats.epsilon);
  }
  if (const auto it = j.find("inference"); it != j.end()) {
    const json& i = *it;
    CheckKeys(i, "inference",
              {"masking_ratio", "num_mask_samples", "pool_kernel",
               "standardise", "write_raw_maps"});
    Take(i, "masking_ratio", "inference", cfg.inference.masking_ratio);
    Take(i, "num_mask_samples", "inference", cfg.inference.num_mask_samples);
    Take(i, "pool_kernel", "inference", cfg.inference.pool_kernel);
    Take(i, "standardise", "inference", cfg.standardise);
    Take(i, "write_raw_maps", "inference", cfg.write_raw_maps);
  }
  if (const auto it = j.find("ablation"); it != j.end()) {
    CheckKeys(*it, "ablation", {"mask_ratios"});
    Take(*it, "mask_ratios", "ablation", cfg.ablation_ratios);
  }
}

RunConfig LoadRunConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  ApplyJson(j, cfg);
  return cfg;
}

void WriteResolvedConfig(const RunConfig& cfg) {
  fs::create_directories(cfg.run_dir);
  const fs::path path = cfg.run_dir / "resolved_config.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << cfg.ToJson().dump(2) << '\n';
}

}  // namespace oodmae
