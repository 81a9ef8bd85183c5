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

#include "oodmae/latent_stats.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "oodmae/error.h"
#include "oodmae/random.h"

namespace oodmae {

const char* GranularityName(StatsGranularity g) {
  return g == StatsGranularity::kChannel ? "channel" : "position-channel";
}

StatsGranularity ParseGranularity(const std::string& s) {
  if (s == "channel") return StatsGranularity::kChannel;
  if (s == "position-channel") return StatsGranularity::kPositionChannel;
  throw ValueError("unknown stats granularity '" + s + "'");
}

LatentStats LatentStats::Identity(int dim) {
  LatentStats s;
  s.dim = dim;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 1.0);
  s.count = 1;
  return s;
}

std::span<const double> LatentStats::MeanRow(int position) const {
  return std::span<const double>(mean).subspan(
      static_cast<size_t>(position) * dim, dim);
}

std::span<const double> LatentStats::StdRow(int position) const {
  return std::span<const double>(std).subspan(
      static_cast<size_t>(position) * dim, dim);
}

void MomentAccumulator::Add(std::span<const double> x) {
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (size_t j = 0; j < mean_.size(); ++j) {
    const double delta = x[j] - mean_[j];
    mean_[j] += delta * inv;
    m2_[j] += delta * (x[j] - mean_[j]);
  }
}

void MomentAccumulator::Merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (size_t j = 0; j < mean_.size(); ++j) {
    const double delta = other.mean_[j] - mean_[j];
    mean_[j] = (na * mean_[j] + nb * other.mean_[j]) / n;
    m2_[j] += other.m2_[j] + delta * delta * na * nb / n;
  }
  count_ += other.count_;
}

std::vector<double> MomentAccumulator::Variance() const {
  std::vector<double> var(mean_.size(), 0.0);
  if (count_ == 0) return var;
  for (size_t j = 0; j < var.size(); ++j) {
    var[j] = std::max(0.0, m2_[j] / static_cast<double>(count_));
  }
  return var;
}

LatentStatsAccumulator::LatentStatsAccumulator(StatsGranularity granularity,
                                               int num_positions, int dim)
    : granularity_(granularity),
      num_positions_(num_positions),
      dim_(dim),
      channel_(dim) {
  if (granularity_ == StatsGranularity::kPositionChannel) {
    per_position_.assign(num_positions_, MomentAccumulator(dim));
  }
}

void LatentStatsAccumulator::Add(const LatentTokens& latent) {
  if (latent.tokens.cols != dim_ ||
      latent.tokens.rows != static_cast<int>(latent.visible_indices.size())) {
    throw ShapeError("latent tokens do not match accumulator width");
  }
  for (int r = 0; r < latent.tokens.rows; ++r) {
    const auto row = latent.tokens.row_span(r);
    channel_.Add(row);
    if (granularity_ == StatsGranularity::kPositionChannel) {
      const int pos = latent.visible_indices[r];
      if (pos < 0 || pos >= num_positions_) {
        throw ShapeError("visible index outside the patch grid");
      }
      per_position_[pos].Add(row);
    }
  }
}

void LatentStatsAccumulator::Merge(const LatentStatsAccumulator& other) {
  if (other.granularity_ != granularity_ || other.dim_ != dim_ ||
      other.num_positions_ != num_positions_) {
    throw ShapeError("cannot merge accumulators of different layouts");
  }
  channel_.Merge(other.channel_);
  for (size_t p = 0; p < per_position_.size(); ++p) {
    per_position_[p].Merge(other.per_position_[p]);
  }
}

LatentStats LatentStatsAccumulator::Finalize(double epsilon) const {
  if (channel_.count() == 0) throw EmptyStreamError("no latent tokens seen");
  LatentStats stats;
  stats.granularity = granularity_;
  stats.dim = dim_;
  stats.count = channel_.count();
  stats.epsilon = epsilon;
  auto append = [&](const MomentAccumulator& acc) {
    const std::vector<double> var = acc.Variance();
    stats.mean.insert(stats.mean.end(), acc.mean().begin(), acc.mean().end());
    for (double v : var) stats.std.push_back(std::sqrt(v));
  };
  if (granularity_ == StatsGranularity::kChannel) {
    stats.positions = 1;
    append(channel_);
  } else {
    stats.positions = num_positions_;
    for (const MomentAccumulator& acc : per_position_) {
      append(acc.count() > 0 ? acc : channel_);
    }
  }
  for (double s : stats.std) stats.clamped_channels += s < epsilon;
  if (stats.clamped_channels > 0) {
    std::cerr << "warning: " << stats.clamped_channels
              << " latent channel(s) have std below epsilon=" << epsilon
              << "; clamping\n";
  }
  return stats;
}

LatentStats AccumulateStats(std::span<const LatentTokens> stream,
                            StatsGranularity granularity, int num_positions,
                            int dim, double epsilon) {
  if (stream.empty()) throw EmptyStreamError("empty latent stream");
  LatentStatsAccumulator acc(granularity, num_positions, dim);
  for (const LatentTokens& latent : stream) acc.Add(latent);
  return acc.Finalize(epsilon);
}

namespace {

template <typename Fn>
LatentTokens MapRows(const LatentTokens& latent, const LatentStats& stats,
                     Fn fn) {
  if (latent.tokens.cols != stats.dim) {
    throw ShapeError("latent width " + std::to_string(latent.tokens.cols) +
                     " does not match stats width " +
                     std::to_string(stats.dim));
  }
  LatentTokens out = latent;
  for (int r = 0; r < out.tokens.rows; ++r) {
    int pos = 0;
    if (stats.positions > 1) {
      pos = latent.visible_indices[r];
      if (pos < 0 || pos >= stats.positions) {
        throw ShapeError("visible index outside the stats grid");
      }
    }
    const auto mu = stats.MeanRow(pos);
    const auto sigma = stats.StdRow(pos);
    double* row = out.tokens.row(r);
    for (int j = 0; j < stats.dim; ++j) {
      row[j] = fn(row[j], mu[j], std::max(sigma[j], stats.epsilon));
    }
  }
  return out;
}

}  // namespace

LatentTokens Standardise(const LatentTokens& latent, const LatentStats& stats) {
  return MapRows(latent, stats, [](double z, double mu, double sigma) {
    return (z - mu) / sigma;
  });
}

LatentTokens Destandardise(const LatentTokens& latent,
                           const LatentStats& stats) {
  return MapRows(latent, stats, [](double z, double mu, double sigma) {
    return z * sigma + mu;
  });
}

LatentStats ComputeModelStats(const MaeModel& model,
                              std::span<const Image> images,
                              double masking_ratio, uint64_t seed,
                              StatsGranularity granularity, double epsilon) {
  if (images.empty()) throw EmptyStreamError("no images for statistics");
  const int n = model.config().num_patches();
  const int dim = model.config().embed_dim;
  // Latents are computed in parallel but accumulated in image order.
  std::vector<LatentTokens> latents(images.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < images.size(); ++i) {
    const MaskTemplate mask = SampleMask(n, masking_ratio, DeriveSeed(seed, i));
    latents[i] = model.Encode(images[i], mask);
  }
  return AccumulateStats(latents, granularity, n, dim, epsilon);
}

namespace {

constexpr char kStatsMagic[8] = {'O', 'O', 'D', 'S', 'T', 'A', 'T', 'S'};
constexpr uint32_t kStatsVersion = 1;

template <typename T>
void Put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DecodeError("truncated stats file");
  return v;
}

}  // namespace

void SaveStats(const std::filesystem::path& path, const LatentStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write stats " + path.string());
  out.write(kStatsMagic, sizeof(kStatsMagic));
  Put(out, kStatsVersion);
  Put(out, static_cast<uint32_t>(stats.granularity));
  Put(out, static_cast<int32_t>(stats.positions));
  Put(out, static_cast<int32_t>(stats.dim));
  Put(out, stats.count);
  Put(out, stats.epsilon);
  Put(out, static_cast<int32_t>(stats.clamped_channels));
  out.write(reinterpret_cast<const char*>(stats.mean.data()),
            static_cast<std::streamsize>(stats.mean.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(stats.std.data()),
            static_cast<std::streamsize>(stats.std.size() * sizeof(double)));
  if (!out) throw IoError("cannot write stats " + path.string());
}

LatentStats LoadStats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read stats " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kStatsMagic)) {
    throw DecodeError(path.string() + " is not a stats file");
  }
  if (Get<uint32_t>(in) != kStatsVersion) {
    throw DecodeError("unsupported stats version");
  }
  LatentStats s;
  const auto g = Get<uint32_t>(in);
  if (g > 1) throw DecodeError("bad granularity tag");
  s.granularity = static_cast<StatsGranularity>(g);
  s.positions = Get<int32_t>(in);
  s.dim = Get<int32_t>(in);
  s.count = Get<int64_t>(in);
  s.epsilon = Get<double>(in);
  s.clamped_channels = Get<int32_t>(in);
  if (s.positions <= 0 || s.dim <= 0) throw DecodeError("bad stats shape");
  const size_t n = static_cast<size_t>(s.positions) * s.dim;
  s.mean.resize(n);
  s.std.resize(n);
  in.read(reinterpret_cast<char*>(s.mean.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(s.std.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DecodeError("truncated stats file");
  return s;
}

}  // namespace oodmae
