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

#ifndef OODMAE_METRICS_H_
#define OODMAE_METRICS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oodmae/image.h"

namespace oodmae {

inline constexpr int kNumThresholds = 256;
using ThresholdCurve = std::array<double, kNumThresholds>;

// pixel = 1 iff round(255 * score) > t. Throws ValueError unless
// 0 <= t <= 255.
BinaryMask Binarise(const ScoreMap& map, int t);

// TN / (TN + FP); 1 when the ground truth has no background.
double Specificity(const BinaryMask& pred, const BinaryMask& gt);

// Structure measure on a continuous map in [0, 1]:
// alpha * object-aware + (1 - alpha) * region-aware similarity, with the
// all-background / all-foreground ground-truth branches. Clipped to [0, 1].
double StructureMeasure(const ScoreMap& map, const BinaryMask& gt,
                        double alpha = 0.5);

// Enhanced-alignment measure of a binary prediction: pixel mean of
// (1 + xi)^2 / 4 with xi the bias-aligned agreement of prediction and
// ground truth.
double EMeasure(const BinaryMask& pred, const BinaryMask& gt);

enum class SweepMetric { kSpecificity, kEMeasure };

struct ThresholdSweep {
  double max = 0.0;
  int argmax = 0;  // smallest threshold attaining the max
  ThresholdCurve curve{};
};

// Evaluates the metric on Binarise(map, t) for every t in 0..255. Confusion
// counts for all thresholds come from one histogram pass over the map.
ThresholdSweep MaxOverThresholds(SweepMetric metric, const ScoreMap& map,
                                 const BinaryMask& gt);

// Rank-based AUROC with midranks for ties, positives = ground-truth
// foreground. nullopt when the ground truth holds a single class.
std::optional<double> PixelAuroc(const ScoreMap& map, const BinaryMask& gt);

struct ImageMetrics {
  std::string id;
  double max_spe = 0.0;
  double spe_at_best_ephi = 0.0;
  double s_alpha = 0.0;
  double max_ephi = 0.0;
  int best_ephi_threshold = 0;
  std::optional<double> auroc;
  ThresholdCurve spe_curve{};
  ThresholdCurve ephi_curve{};
};

struct MetricsReport {
  std::vector<ImageMetrics> images;
  double mean_max_spe = 0.0;
  double mean_spe_at_best_ephi = 0.0;
  double mean_s_alpha = 0.0;
  double mean_max_ephi = 0.0;
  double mean_auroc = 0.0;  // over images with a defined AUROC
  int auroc_images = 0;
  ThresholdCurve mean_spe_curve{};
  ThresholdCurve mean_ephi_curve{};
};

// `map` must already be normalised to [0, 1].
ImageMetrics EvaluateImage(const std::string& id, const ScoreMap& map,
                           const BinaryMask& gt);

struct EvalItem {
  std::string id;
  ScoreMap map;
  BinaryMask gt;
};

// Images are evaluated in parallel; means are reduced in input order.
MetricsReport EvaluateDataset(const std::vector<EvalItem>& items);

// Writes per_image.csv (image_id,max_spe,s_alpha,max_ephi,auroc),
// summary.txt (key=value lines), curves_spe.csv and curves_ephi.csv.
void WriteReport(const std::filesystem::path& dir, const MetricsReport& report);

}  // namespace oodmae

#endif  // OODMAE_METRICS_H_
