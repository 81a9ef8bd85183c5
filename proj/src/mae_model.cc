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

#include "oodmae/mae_model.h"

#include <bit>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "oodmae/error.h"
#include "oodmae/random.h"

namespace oodmae {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void ModelConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (patch_size <= 0 || embed_dim <= 0 || encoder_depth <= 0 ||
      encoder_heads <= 0 || decoder_dim <= 0 || decoder_depth <= 0 ||
      decoder_heads <= 0 || resolution <= 0 || channels <= 0 ||
      mlp_ratio <= 0) {
    fail("model config fields must be positive");
  }
  if (embed_dim % encoder_heads != 0) {
    fail("embed_dim must be divisible by encoder_heads");
  }
  if (decoder_dim % decoder_heads != 0) {
    fail("decoder_dim must be divisible by decoder_heads");
  }
  if (resolution % patch_size != 0) {
    fail("resolution must be divisible by patch_size");
  }
  if (embed_dim % 4 != 0 || decoder_dim % 4 != 0) {
    fail("embedding widths must be multiples of 4 for 2-D sin-cos tables");
  }
}

ModelConfig ModelConfig::Tiny() { return ModelConfig{}; }

ModelConfig ModelConfig::Base() {
  ModelConfig c;
  c.patch_size = 16;
  c.embed_dim = 768;
  c.encoder_depth = 12;
  c.encoder_heads = 12;
  c.decoder_dim = 512;
  c.decoder_depth = 8;
  c.decoder_heads = 16;
  c.resolution = 224;
  return c;
}

ModelConfig ModelConfig::Preset(const std::string& name) {
  if (name == "tiny") return Tiny();
  if (name == "base") return Base();
  throw ConfigError("unknown preset '" + name + "' (expected tiny|base)");
}

Matrix SinCosPositionTable(int grid, int dim) {
  Matrix table(grid * grid, dim);
  const int quarter = dim / 4;
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      double* row = table.row(gy * grid + gx);
      for (int i = 0; i < quarter; ++i) {
        const double omega =
            1.0 / std::pow(10000.0, static_cast<double>(i) / quarter);
        row[i] = std::sin(gx * omega);
        row[quarter + i] = std::cos(gx * omega);
        row[2 * quarter + i] = std::sin(gy * omega);
        row[3 * quarter + i] = std::cos(gy * omega);
      }
    }
  }
  return table;
}

struct MaeModel::Trace {
  Matrix visible_patches;
  std::vector<nn::BlockCache> encoder;
  nn::LayerNormCache encoder_norm;
  Matrix latent;
  std::vector<nn::BlockCache> decoder;
  nn::LayerNormCache decoder_norm;
  Matrix decoder_normed;
};

MaeModel::MaeModel(const ModelConfig& config) : config_(config) {
  config_.Validate();
  encoder_pos_ = SinCosPositionTable(config_.grid_size(), config_.embed_dim);
  decoder_pos_ = SinCosPositionTable(config_.grid_size(), config_.decoder_dim);
  patch_embed_ = nn::Linear::Create(params_, "encoder.patch_embed",
                                    config_.patch_dim(), config_.embed_dim);
  for (int i = 0; i < config_.encoder_depth; ++i) {
    encoder_blocks_.push_back(nn::Block::Create(
        params_, "encoder.blocks." + std::to_string(i), config_.embed_dim,
        config_.encoder_heads, config_.mlp_ratio));
  }
  encoder_norm_ =
      nn::LayerNorm::Create(params_, "encoder.norm", config_.embed_dim);
  decoder_embed_ = nn::Linear::Create(params_, "decoder.embed",
                                      config_.embed_dim, config_.decoder_dim);
  empty_token_ = params_.Add("decoder.empty_token", {config_.decoder_dim},
                             /*decay=*/false);
  for (int i = 0; i < config_.decoder_depth; ++i) {
    decoder_blocks_.push_back(nn::Block::Create(
        params_, "decoder.blocks." + std::to_string(i), config_.decoder_dim,
        config_.decoder_heads, config_.mlp_ratio));
  }
  decoder_norm_ =
      nn::LayerNorm::Create(params_, "decoder.norm", config_.decoder_dim);
  decoder_pred_ = nn::Linear::Create(params_, "decoder.pred",
                                     config_.decoder_dim, config_.patch_dim());
}

MaeModel MaeModel::Init(const ModelConfig& config, uint64_t seed) {
  MaeModel model(config);
  Rng rng(DeriveSeed(seed, 0x494E4954));
  for (ParamStore::Id id = 0; id < model.params_.entries().size(); ++id) {
    const ParamEntry& e = model.params_.entry(id);
    const bool is_matrix = e.shape.size() == 2;
    if (is_matrix || id == model.empty_token_) {
      for (double& v : model.params_.Values(id)) v = rng.TruncatedNormal(0.02);
    }
  }
  return model;
}

void MaeModel::CheckImage(const Image& img, const MaskTemplate& mask) const {
  if (img.channels != config_.channels || img.height != config_.resolution ||
      img.width != config_.resolution) {
    throw ShapeError(
        "image " + std::to_string(img.channels) + "x" +
        std::to_string(img.height) + "x" + std::to_string(img.width) +
        " does not match model input " + std::to_string(config_.channels) +
        "x" + std::to_string(config_.resolution) + "x" +
        std::to_string(config_.resolution));
  }
  if (mask.num_patches() != config_.num_patches()) {
    throw ShapeError("mask covers " + std::to_string(mask.num_patches()) +
                     " patches, model expects " +
                     std::to_string(config_.num_patches()));
  }
}

void MaeModel::EncodeInto(const Image& img, const std::vector<int>& visible,
                          Matrix& latent, Trace* trace) const {
  const Matrix patches = PatchTokens(img, config_.patch_size);
  Matrix vis(static_cast<int>(visible.size()), config_.patch_dim());
  for (size_t i = 0; i < visible.size(); ++i) {
    std::copy_n(patches.row(visible[i]), patches.cols,
                vis.row(static_cast<int>(i)));
  }
  Matrix x;
  patch_embed_.Forward(params_, vis, x);
  for (size_t i = 0; i < visible.size(); ++i) {
    const double* pos = encoder_pos_.row(visible[i]);
    double* row = x.row(static_cast<int>(i));
    for (int j = 0; j < x.cols; ++j) row[j] += pos[j];
  }
  if (trace != nullptr) {
    trace->visible_patches = std::move(vis);
    trace->encoder.assign(encoder_blocks_.size(), nn::BlockCache());
  }
  for (size_t b = 0; b < encoder_blocks_.size(); ++b) {
    encoder_blocks_[b].Forward(params_, x,
                               trace ? &trace->encoder[b] : nullptr);
  }
  encoder_norm_.Forward(params_, x, latent,
                        trace ? &trace->encoder_norm : nullptr);
}

void MaeModel::DecodeInto(const Matrix& latent, const MaskTemplate& mask,
                          const std::vector<int>& visible, Matrix& pred,
                          Trace* trace) const {
  Matrix projected;
  decoder_embed_.Forward(params_, latent, projected);
  const int n = config_.num_patches();
  Matrix x(n, config_.decoder_dim);
  const auto empty = params_.Values(empty_token_);
  for (int t = 0; t < n; ++t) {
    if (mask.masked[t]) std::copy(empty.begin(), empty.end(), x.row(t));
  }
  for (size_t i = 0; i < visible.size(); ++i) {
    std::copy_n(projected.row(static_cast<int>(i)), x.cols, x.row(visible[i]));
  }
  for (size_t i = 0; i < x.size(); ++i) x.data[i] += decoder_pos_.data[i];
  if (trace != nullptr) {
    trace->decoder.assign(decoder_blocks_.size(), nn::BlockCache());
  }
  for (size_t b = 0; b < decoder_blocks_.size(); ++b) {
    decoder_blocks_[b].Forward(params_, x,
                               trace ? &trace->decoder[b] : nullptr);
  }
  Matrix normed;
  decoder_norm_.Forward(params_, x, normed,
                        trace ? &trace->decoder_norm : nullptr);
  decoder_pred_.Forward(params_, normed, pred);
  if (trace != nullptr) trace->decoder_normed = std::move(normed);
}

LatentTokens MaeModel::Encode(const Image& img,
                              const MaskTemplate& mask) const {
  CheckImage(img, mask);
  LatentTokens out;
  out.visible_indices = mask.VisibleIndices();
  EncodeInto(img, out.visible_indices, out.tokens, nullptr);
  return out;
}

Matrix MaeModel::DecodeTokens(const LatentTokens& latent,
                              const MaskTemplate& mask) const {
  if (mask.num_patches() != config_.num_patches()) {
    throw ShapeError("mask does not match the model's patch grid");
  }
  if (latent.visible_indices != mask.VisibleIndices()) {
    throw ShapeError("latent visible indices disagree with the mask");
  }
  if (latent.tokens.rows != static_cast<int>(latent.visible_indices.size()) ||
      latent.tokens.cols != config_.embed_dim) {
    throw ShapeError("latent tokens have shape " +
                     std::to_string(latent.tokens.rows) + "x" +
                     std::to_string(latent.tokens.cols) + ", expected " +
                     std::to_string(latent.visible_indices.size()) + "x" +
                     std::to_string(config_.embed_dim));
  }
  Matrix pred;
  DecodeInto(latent.tokens, mask, latent.visible_indices, pred, nullptr);
  return pred;
}

Image MaeModel::Decode(const LatentTokens& latent,
                       const MaskTemplate& mask) const {
  return TokensToImage(DecodeTokens(latent, mask), config_.patch_size,
                       config_.channels, config_.resolution,
                       config_.resolution);
}

double MaeModel::Loss(const Image& img, const MaskTemplate& mask) const {
  CheckImage(img, mask);
  const std::vector<int> visible = mask.VisibleIndices();
  Matrix latent, pred;
  EncodeInto(img, visible, latent, nullptr);
  DecodeInto(latent, mask, visible, pred, nullptr);
  const Matrix target = PatchTokens(img, config_.patch_size);
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

double MaeModel::LossAndGradient(const Image& img, const MaskTemplate& mask,
                                 double loss_scale,
                                 std::span<double> grads) const {
  CheckImage(img, mask);
  if (grads.size() != params_.total_size()) {
    throw ShapeError("gradient buffer does not match parameter count");
  }
  const std::vector<int> visible = mask.VisibleIndices();
  Trace trace;
  Matrix latent, pred;
  EncodeInto(img, visible, latent, &trace);
  DecodeInto(latent, mask, visible, pred, &trace);
  const Matrix target = PatchTokens(img, config_.patch_size);

  const double count = static_cast<double>(pred.size());
  double sum = 0.0;
  Matrix dpred(pred.rows, pred.cols);
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    sum += d * d;
    dpred.data[i] = loss_scale * 2.0 * d / count;
  }

  Matrix dnormed, dx;
  decoder_pred_.Backward(params_, trace.decoder_normed, dpred, &dnormed, grads);
  decoder_norm_.Backward(params_, trace.decoder_norm, dnormed, dx, grads);
  for (size_t b = decoder_blocks_.size(); b-- > 0;) {
    decoder_blocks_[b].Backward(params_, trace.decoder[b], dx, grads);
  }
  auto dempty = params_.Slice(grads, empty_token_);
  Matrix dprojected(static_cast<int>(visible.size()), config_.decoder_dim);
  for (int t = 0; t < dx.rows; ++t) {
    if (!mask.masked[t]) continue;
    const double* row = dx.row(t);
    for (int j = 0; j < dx.cols; ++j) dempty[j] += row[j];
  }
  for (size_t i = 0; i < visible.size(); ++i) {
    std::copy_n(dx.row(visible[i]), dx.cols,
                dprojected.row(static_cast<int>(i)));
  }
  Matrix dlatent;
  decoder_embed_.Backward(params_, latent, dprojected, &dlatent, grads);
  encoder_norm_.Backward(params_, trace.encoder_norm, dlatent, dx, grads);
  for (size_t b = encoder_blocks_.size(); b-- > 0;) {
    encoder_blocks_[b].Backward(params_, trace.encoder[b], dx, grads);
  }
  patch_embed_.Backward(params_, trace.visible_patches, dx, nullptr, grads);
  return sum / count;
}

// ---------------------------------------------------------------------------
// Checkpoint container.

namespace {

constexpr char kCheckpointMagic[8] = {'O', 'O', 'D', 'M', 'A', 'E', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void WritePod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DecodeError("truncated checkpoint");
  return v;
}

nlohmann::json ConfigToJson(const ModelConfig& c) {
  return {
      {"patch_size", c.patch_size},       {"embed_dim", c.embed_dim},
      {"encoder_depth", c.encoder_depth}, {"encoder_heads", c.encoder_heads},
      {"decoder_dim", c.decoder_dim},     {"decoder_depth", c.decoder_depth},
      {"decoder_heads", c.decoder_heads}, {"resolution", c.resolution},
      {"channels", c.channels},           {"mlp_ratio", c.mlp_ratio}};
}

ModelConfig ConfigFromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.patch_size = j.at("patch_size").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.encoder_depth = j.at("encoder_depth").get<int>();
  c.encoder_heads = j.at("encoder_heads").get<int>();
  c.decoder_dim = j.at("decoder_dim").get<int>();
  c.decoder_depth = j.at("decoder_depth").get<int>();
  c.decoder_heads = j.at("decoder_heads").get<int>();
  c.resolution = j.at("resolution").get<int>();
  c.channels = j.at("channels").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  return c;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const MaeModel& model,
                    uint64_t train_seed, double masking_ratio) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  nlohmann::json header = {{"config", ConfigToJson(model.config())},
                           {"train_seed", train_seed},
                           {"masking_ratio", masking_ratio}};
  const std::string text = header.dump();
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  WritePod(out, kCheckpointVersion);
  WritePod(out, static_cast<uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const ParamStore& params = model.params();
  WritePod(out, static_cast<uint64_t>(params.entries().size()));
  for (ParamStore::Id id = 0; id < params.entries().size(); ++id) {
    const ParamEntry& e = params.entry(id);
    WritePod(out, static_cast<uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    WritePod(out, static_cast<uint32_t>(e.shape.size()));
    for (int d : e.shape) WritePod(out, static_cast<int64_t>(d));
    const auto values = params.Values(id);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) throw IoError("cannot write checkpoint " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kCheckpointMagic)) {
    throw DecodeError(path.string() + " is not a checkpoint");
  }
  const auto version = ReadPod<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DecodeError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  const auto header_size = ReadPod<uint64_t>(in);
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw DecodeError("truncated checkpoint header");
  const nlohmann::json header = nlohmann::json::parse(text);
  Checkpoint ckpt{MaeModel(ConfigFromJson(header.at("config"))),
                  header.at("train_seed").get<uint64_t>(),
                  header.at("masking_ratio").get<double>()};
  ParamStore& params = ckpt.model.params();
  const auto count = ReadPod<uint64_t>(in);
  if (count != params.entries().size()) {
    throw DecodeError("checkpoint tensor count does not match its config");
  }
  for (uint64_t t = 0; t < count; ++t) {
    const auto name_size = ReadPod<uint32_t>(in);
    std::string name(name_size, '\0');
    in.read(name.data(), name_size);
    const auto id = params.Find(name);
    if (!in || !id) throw DecodeError("unknown tensor '" + name + "'");
    const ParamEntry& e = params.entry(*id);
    const auto ndim = ReadPod<uint32_t>(in);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(ReadPod<int64_t>(in));
    if (shape != e.shape) throw DecodeError("shape mismatch for " + name);
    auto values = params.Values(*id);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw DecodeError("truncated tensor " + name);
  }
  return ckpt;
}

}  // namespace oodmae
