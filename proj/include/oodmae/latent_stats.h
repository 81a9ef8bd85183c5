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

#ifndef OODMAE_LATENT_STATS_H_
#define OODMAE_LATENT_STATS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oodmae/mae_model.h"

namespace oodmae {

enum class StatsGranularity {
  kChannel,          // one [dim] mean/std over every visible token
  kPositionChannel,  // one [dim] mean/std per grid position
};

const char* GranularityName(StatsGranularity g);
StatsGranularity ParseGranularity(const std::string& s);

// Finalised statistics of in-distribution latent tokens.
struct LatentStats {
  StatsGranularity granularity = StatsGranularity::kChannel;
  int positions = 1;  // 1 for channel mode, num_patches otherwise
  int dim = 0;
  std::vector<double> mean;  // [positions * dim]
  std::vector<double> std;   // population std, unclamped
  int64_t count = 0;         // contributing tokens
  double epsilon = 1e-6;
  // Channels whose std fell below epsilon (standardise divides by epsilon).
  int clamped_channels = 0;

  // Mean 0 / std 1 everywhere: standardisation becomes the identity.
  static LatentStats Identity(int dim);

  std::span<const double> MeanRow(int position) const;
  std::span<const double> StdRow(int position) const;

  friend bool operator==(const LatentStats&, const LatentStats&) = default;
};

// Running count / mean / sum of squared deviations for a vector of
// channels. Merge is associative and commutative up to rounding.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int dim = 0) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void Add(std::span<const double> x);
  void Merge(const MomentAccumulator& other);

  int dim() const { return static_cast<int>(mean_.size()); }
  int64_t count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  // Population variance.
  std::vector<double> Variance() const;

 private:
  int64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

// Streams latent tokens into channel and (optionally) per-position
// accumulators. Partial accumulators built over disjoint parts of a stream
// can be merged.
class LatentStatsAccumulator {
 public:
  LatentStatsAccumulator(StatsGranularity granularity, int num_positions,
                         int dim);

  void Add(const LatentTokens& latent);
  void Merge(const LatentStatsAccumulator& other);
  int64_t count() const { return channel_.count(); }

  // Throws EmptyStreamError if nothing was added. Positions never observed
  // take the channel-mode values.
  LatentStats Finalize(double epsilon = 1e-6) const;

 private:
  StatsGranularity granularity_;
  int num_positions_;
  int dim_;
  MomentAccumulator channel_;
  std::vector<MomentAccumulator> per_position_;
};

LatentStats AccumulateStats(std::span<const LatentTokens> stream,
                            StatsGranularity granularity, int num_positions,
                            int dim, double epsilon = 1e-6);

// (z - mean) / max(std, epsilon), row by row, using each token's grid
// position in position-channel mode. visible_indices are kept.
LatentTokens Standardise(const LatentTokens& latent, const LatentStats& stats);
LatentTokens Destandardise(const LatentTokens& latent,
                           const LatentStats& stats);

// Encodes every image once (mask seed derived from `seed` and the image
// index) and accumulates the resulting latents.
LatentStats ComputeModelStats(const MaeModel& model,
                              std::span<const Image> images,
                              double masking_ratio, uint64_t seed,
                              StatsGranularity granularity,
                              double epsilon = 1e-6);

// Binary container: magic, version, granularity, shapes, count, epsilon,
// then mean and std as little-endian float64.
void SaveStats(const std::filesystem::path& path, const LatentStats& stats);
LatentStats LoadStats(const std::filesystem::path& path);

}  // namespace oodmae

#endif  // OODMAE_LATENT_STATS_H_
