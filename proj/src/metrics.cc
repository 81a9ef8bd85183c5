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

#include "oodmae/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "oodmae/error.h"
#include "oodmae/kernels.h"

namespace oodmae {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void CheckSameShape(int h1, int w1, int h2, int w2, const char* what) {
  if (h1 != h2 || w1 != w2) {
    throw ShapeError(std::string(what) + ": prediction " + std::to_string(h1) +
                     "x" + std::to_string(w1) + " vs ground truth " +
                     std::to_string(h2) + "x" + std::to_string(w2));
  }
}

struct Confusion {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  int64_t total() const { return tp + fp + fn + tn; }
};

double SpecificityFrom(const Confusion& c) {
  const int64_t negatives = c.tn + c.fp;
  if (negatives == 0) return 1.0;
  return static_cast<double>(c.tn) / static_cast<double>(negatives);
}

double AlignedScore(double p, double g, double mu_p, double mu_g) {
  const double ap = p - mu_p;
  const double ag = g - mu_g;
  const double xi = 2.0 * ap * ag / (ap * ap + ag * ag + kEps);
  return (1.0 + xi) * (1.0 + xi) / 4.0;
}

// A binary prediction takes only four (pred, gt) combinations, so the
// enhanced-alignment mean is a weighted sum of four terms.
double EMeasureFrom(const Confusion& c) {
  const double n = static_cast<double>(c.total());
  const double fg = static_cast<double>(c.tp + c.fn);
  const double predicted = static_cast<double>(c.tp + c.fp);
  if (fg == 0.0) return (n - predicted) / n;
  if (fg == n) return predicted / n;
  const double mu_p = predicted / n;
  const double mu_g = fg / n;
  const double sum = c.tp * AlignedScore(1, 1, mu_p, mu_g) +
                     c.fp * AlignedScore(1, 0, mu_p, mu_g) +
                     c.fn * AlignedScore(0, 1, mu_p, mu_g) +
                     c.tn * AlignedScore(0, 0, mu_p, mu_g);
  return std::clamp(sum / n, 0.0, 1.0);
}

Confusion Count(const BinaryMask& pred, const BinaryMask& gt) {
  Confusion c;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.data[i] != 0;
    const bool g = gt.data[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

// Sum, sum of squares and cross sums over a rectangle; enough for every
// term of the region similarity.
struct RegionSums {
  double n = 0, sp = 0, sg = 0, spp = 0, sgg = 0, spg = 0;
};

double RegionSsim(const RegionSums& r) {
  const double x = r.sp / r.n;
  const double y = r.sg / r.n;
  const double denom = r.n - 1.0 + kEps;
  const double sxx = std::max(0.0, r.spp - r.n * x * x) / denom;
  const double syy = std::max(0.0, r.sgg - r.n * y * y) / denom;
  const double sxy = (r.spg - r.n * x * y) / denom;
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sxx + syy);
  if (alpha != 0.0) return alpha / (beta + kEps);
  if (beta == 0.0) return 1.0;
  return 0.0;
}

double ObjectScore(double mean, double stddev) {
  return 2.0 * mean / (mean * mean + 1.0 + stddev + kEps);
}

}  // namespace

BinaryMask Binarise(const ScoreMap& map, int t) {
  if (t < 0 || t > 255) {
    throw ValueError("threshold " + std::to_string(t) + " outside [0, 255]");
  }
  BinaryMask out(map.height, map.width);
  for (size_t i = 0; i < map.size(); ++i) {
    out.data[i] = QuantizeUnit(map.data[i]) > t;
  }
  return out;
}

double Specificity(const BinaryMask& pred, const BinaryMask& gt) {
  CheckSameShape(pred.height, pred.width, gt.height, gt.width, "Specificity");
  return SpecificityFrom(Count(pred, gt));
}

double EMeasure(const BinaryMask& pred, const BinaryMask& gt) {
  CheckSameShape(pred.height, pred.width, gt.height, gt.width, "EMeasure");
  if (gt.size() == 0) throw ShapeError("EMeasure: empty map");
  return EMeasureFrom(Count(pred, gt));
}

double StructureMeasure(const ScoreMap& map, const BinaryMask& gt,
                        double alpha) {
  CheckSameShape(map.height, map.width, gt.height, gt.width,
                 "StructureMeasure");
  const int h = gt.height, w = gt.width;
  const double n = static_cast<double>(gt.size());
  if (n == 0) throw ShapeError("StructureMeasure: empty map");

  double fg_count = 0, fg_sum = 0, fg_sq = 0;
  double bg_count = 0, bg_sum = 0, bg_sq = 0;
  double pred_sum = 0, col_moment = 0, row_moment = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double p = map.at(y, x);
      pred_sum += p;
      if (gt.at(y, x)) {
        fg_count += 1;
        fg_sum += p;
        fg_sq += p * p;
        col_moment += x + 1;
        row_moment += y + 1;
      } else {
        const double q = 1.0 - p;
        bg_count += 1;
        bg_sum += q;
        bg_sq += q * q;
      }
    }
  }
  const double gt_mean = fg_count / n;
  if (fg_count == 0) return std::clamp(1.0 - pred_sum / n, 0.0, 1.0);
  if (fg_count == n) return std::clamp(pred_sum / n, 0.0, 1.0);

  // Object-aware term; spread is the sample standard deviation.
  auto sample_std = [](double count, double sum, double sq) {
    if (count < 2) return 0.0;
    const double mean = sum / count;
    return std::sqrt(std::max(0.0, (sq - count * mean * mean) / (count - 1)));
  };
  const double object_fg =
      ObjectScore(fg_sum / fg_count, sample_std(fg_count, fg_sum, fg_sq));
  const double object_bg =
      ObjectScore(bg_sum / bg_count, sample_std(bg_count, bg_sum, bg_sq));
  const double s_object = gt_mean * object_fg + (1.0 - gt_mean) * object_bg;

  // Region-aware term: split at the 1-based, rounded foreground centroid.
  const int cx = static_cast<int>(std::round(col_moment / fg_count));
  const int cy = static_cast<int>(std::round(row_moment / fg_count));
  RegionSums regions[4];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      RegionSums& r = regions[(y < cy ? 0 : 2) + (x < cx ? 0 : 1)];
      const double p = map.at(y, x);
      const double g = gt.at(y, x) ? 1.0 : 0.0;
      r.n += 1;
      r.sp += p;
      r.sg += g;
      r.spp += p * p;
      r.sgg += g * g;
      r.spg += p * g;
    }
  }
  const double area = static_cast<double>(w) * h;
  const double weights[4] = {
      static_cast<double>(cx) * cy / area,
      static_cast<double>(w - cx) * cy / area,
      static_cast<double>(cx) * (h - cy) / area,
      0.0,
  };
  const double w4 = 1.0 - weights[0] - weights[1] - weights[2];
  double s_region = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (regions[i].n == 0) continue;
    s_region += (i == 3 ? w4 : weights[i]) * RegionSsim(regions[i]);
  }
  const double score = alpha * s_object + (1.0 - alpha) * s_region;
  return std::clamp(score, 0.0, 1.0);
}

ThresholdSweep MaxOverThresholds(SweepMetric metric, const ScoreMap& map,
                                 const BinaryMask& gt) {
  CheckSameShape(map.height, map.width, gt.height, gt.width,
                 "MaxOverThresholds");
  if (gt.size() == 0) throw ShapeError("MaxOverThresholds: empty map");
  kernels::LevelHistogram fg, bg;
  kernels::LevelHistograms(map.data, gt.data, fg, bg);
  const int64_t fg_total = std::accumulate(fg.begin(), fg.end(), int64_t{0});
  const int64_t bg_total = std::accumulate(bg.begin(), bg.end(), int64_t{0});

  ThresholdSweep sweep;
  // Walk thresholds downward so "level > t" counts grow by one bin per step.
  int64_t fg_above = 0, bg_above = 0;
  for (int t = 255; t >= 0; --t) {
    if (t < 255) {
      fg_above += fg[t + 1];
      bg_above += bg[t + 1];
    }
    Confusion c;
    c.tp = fg_above;
    c.fp = bg_above;
    c.fn = fg_total - fg_above;
    c.tn = bg_total - bg_above;
    sweep.curve[t] = metric == SweepMetric::kSpecificity ? SpecificityFrom(c)
                                                         : EMeasureFrom(c);
  }
  sweep.argmax = static_cast<int>(
      std::max_element(sweep.curve.begin(), sweep.curve.end()) -
      sweep.curve.begin());
  sweep.max = sweep.curve[sweep.argmax];
  return sweep;
}

std::optional<double> PixelAuroc(const ScoreMap& map, const BinaryMask& gt) {
  CheckSameShape(map.height, map.width, gt.height, gt.width, "PixelAuroc");
  const size_t n = map.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return map.data[a] < map.data[b]; });
  double positives = 0;
  double rank_sum = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && map.data[order[j]] == map.data[order[i]]) ++j;
    // 1-based ranks i+1..j share the midrank.
    const double midrank =
        (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (gt.data[order[k]]) {
        positives += 1;
        rank_sum += midrank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  return (rank_sum - positives * (positives + 1) / 2.0) /
         (positives * negatives);
}

ImageMetrics EvaluateImage(const std::string& id, const ScoreMap& map,
                           const BinaryMask& gt) {
  ImageMetrics m;
  m.id = id;
  const ThresholdSweep spe =
      MaxOverThresholds(SweepMetric::kSpecificity, map, gt);
  const ThresholdSweep eph = MaxOverThresholds(SweepMetric::kEMeasure, map, gt);
  m.max_spe = spe.max;
  m.spe_curve = spe.curve;
  m.max_ephi = eph.max;
  m.ephi_curve = eph.curve;
  m.best_ephi_threshold = eph.argmax;
  m.spe_at_best_ephi = spe.curve[eph.argmax];
  m.s_alpha = StructureMeasure(map, gt);
  m.auroc = PixelAuroc(map, gt);
  return m;
}

MetricsReport EvaluateDataset(const std::vector<EvalItem>& items) {
  MetricsReport report;
  report.images.resize(items.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < items.size(); ++i) {
    report.images[i] = EvaluateImage(items[i].id, items[i].map, items[i].gt);
  }
  if (items.empty()) return report;
  const double inv = 1.0 / static_cast<double>(items.size());
  double auroc_sum = 0.0;
  for (const ImageMetrics& m : report.images) {
    report.mean_max_spe += m.max_spe * inv;
    report.mean_spe_at_best_ephi += m.spe_at_best_ephi * inv;
    report.mean_s_alpha += m.s_alpha * inv;
    report.mean_max_ephi += m.max_ephi * inv;
    for (int t = 0; t < kNumThresholds; ++t) {
      report.mean_spe_curve[t] += m.spe_curve[t] * inv;
      report.mean_ephi_curve[t] += m.ephi_curve[t] * inv;
    }
    if (m.auroc) {
      auroc_sum += *m.auroc;
      ++report.auroc_images;
    }
  }
  report.mean_auroc = report.auroc_images > 0
                          ? auroc_sum / report.auroc_images
                          : std::numeric_limits<double>::quiet_NaN();
  return report;
}

namespace {

void WriteCurves(const std::filesystem::path& path, const MetricsReport& report,
                 bool spe) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  out << "image_id";
  for (int t = 0; t < kNumThresholds; ++t) out << ",t" << t;
  out << '\n';
  auto row = [&](const std::string& id, const ThresholdCurve& c) {
    out << id;
    for (double v : c) out << ',' << v;
    out << '\n';
  };
  for (const ImageMetrics& m : report.images) {
    row(m.id, spe ? m.spe_curve : m.ephi_curve);
  }
  row("mean", spe ? report.mean_spe_curve : report.mean_ephi_curve);
}

}  // namespace

void WriteReport(const std::filesystem::path& dir,
                 const MetricsReport& report) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "per_image.csv");
    if (!out) throw IoError("cannot write " + (dir / "per_image.csv").string());
    out.precision(10);
    out << "image_id,max_spe,s_alpha,max_ephi,auroc\n";
    for (const ImageMetrics& m : report.images) {
      out << m.id << ',' << m.max_spe << ',' << m.s_alpha << ',' << m.max_ephi
          << ',';
      if (m.auroc) {
        out << *m.auroc;
      } else {
        out << "nan";
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.txt");
    if (!out) throw IoError("cannot write " + (dir / "summary.txt").string());
    out.precision(10);
    out << "images=" << report.images.size() << '\n'
        << "mean_max_spe=" << report.mean_max_spe << '\n'
        << "mean_spe_at_best_ephi=" << report.mean_spe_at_best_ephi << '\n'
        << "mean_s_alpha=" << report.mean_s_alpha << '\n'
        << "mean_max_ephi=" << report.mean_max_ephi << '\n'
        << "mean_auroc=" << report.mean_auroc << '\n'
        << "auroc_images=" << report.auroc_images << '\n'
        << "auroc_undefined=" << report.images.size() - report.auroc_images
        << '\n';
  }
  WriteCurves(dir / "curves_spe.csv", report, true);
  WriteCurves(dir / "curves_ephi.csv", report, false);
}

}  // namespace oodmae
