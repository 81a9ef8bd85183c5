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

#include "oodmae/corpus.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "oodmae/error.h"
#include "oodmae/random.h"

namespace oodmae {

namespace fs = std::filesystem;

const char* SplitName(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

const char* LabelName(Label label) {
  return label == Label::kHealthy ? "healthy" : "anomalous";
}

Split ParseSplit(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw ValueError("unknown split '" + s + "'");
}

Label ParseLabel(const std::string& s) {
  if (s == "healthy") return Label::kHealthy;
  if (s == "anomalous") return Label::kAnomalous;
  throw ValueError("unknown label '" + s + "'");
}

void DatasetManifest::Validate() const {
  if (entries.empty()) throw ContractViolation("manifest has no entries");
  if (sample_rate <= 0) throw ContractViolation("sample_rate must be > 0");
  std::set<fs::path> seen;
  for (const ManifestEntry& e : entries) {
    if (!seen.insert(e.image_path.lexically_normal()).second) {
      throw ContractViolation("duplicate manifest path " +
                              e.image_path.string());
    }
    if (e.split == Split::kTrain &&
        (e.label != Label::kHealthy || e.gt_path.has_value())) {
      throw ContractViolation("train entry " + e.image_path.string() +
                              " must be healthy without ground truth");
    }
    if (e.label == Label::kAnomalous && !e.gt_path.has_value()) {
      throw ContractViolation("anomalous entry " + e.image_path.string() +
                              " has no ground truth");
    }
  }
}

std::vector<ManifestEntry> DatasetManifest::Select(Split split) const {
  std::vector<ManifestEntry> out;
  for (const ManifestEntry& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

namespace {

bool IsPngName(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

bool HasPngSignature(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return false;
  png_byte sig[8];
  in.read(reinterpret_cast<char*>(sig), sizeof(sig));
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

std::vector<fs::path> SortedPngFiles(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (item.is_regular_file() && IsPngName(item.path())) {
      files.push_back(item.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

ManifestBuild BuildManifest(const fs::path& root_dir, int sample_rate,
                            Split split) {
  if (sample_rate <= 0) throw ValueError("sample_rate must be > 0");
  if (!fs::is_directory(root_dir)) {
    throw IoError("corpus root " + root_dir.string() + " is not a directory");
  }
  std::vector<fs::path> sequences;
  if (!SortedPngFiles(root_dir).empty()) sequences.push_back(root_dir);
  for (const auto& item : fs::directory_iterator(root_dir)) {
    if (item.is_directory() && item.path().filename() != "masks") {
      sequences.push_back(item.path());
    }
  }
  std::sort(sequences.begin(), sequences.end());

  ManifestBuild result;
  result.manifest.sample_rate = sample_rate;
  for (const fs::path& seq : sequences) {
    const std::vector<fs::path> frames = SortedPngFiles(seq);
    for (size_t i = 0; i < frames.size(); i += sample_rate) {
      if (!HasPngSignature(frames[i])) {
        ++result.skipped;
        continue;
      }
      ManifestEntry entry;
      entry.image_path = frames[i];
      entry.split = split;
      entry.label = Label::kHealthy;
      if (split == Split::kTest) {
        const fs::path gt = seq / "masks" / frames[i].filename();
        if (fs::is_regular_file(gt)) {
          entry.gt_path = gt;
          entry.label = Label::kAnomalous;
        }
      }
      result.manifest.entries.push_back(std::move(entry));
    }
  }
  if (result.manifest.entries.empty()) {
    throw EmptyCorpusError("no readable frames under " + root_dir.string());
  }
  result.manifest.Validate();
  return result;
}

namespace {

std::string RelativeTo(const fs::path& p, const fs::path& base) {
  const fs::path abs_p = fs::absolute(p).lexically_normal();
  const fs::path abs_base = fs::absolute(base).lexically_normal();
  const fs::path rel = abs_p.lexically_relative(abs_base);
  if (rel.empty()) return abs_p.string();
  return rel.string();
}

}  // namespace

void WriteManifest(const fs::path& path, const DatasetManifest& manifest) {
  const fs::path base =
      path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "# sample_rate=" << manifest.sample_rate << '\n';
  for (const ManifestEntry& e : manifest.entries) {
    out << RelativeTo(e.image_path, base) << '\t'
        << (e.gt_path ? RelativeTo(*e.gt_path, base) : std::string("-")) << '\t'
        << SplitName(e.split) << '\t' << LabelName(e.label) << '\n';
  }
  if (!out) throw IoError("cannot write manifest " + path.string());
}

DatasetManifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& s) {
    fs::path p(s);
    return p.is_absolute() ? p : (base / p).lexically_normal();
  };
  DatasetManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view kRate = "# sample_rate=";
      if (line.rfind(kRate, 0) == 0) {
        manifest.sample_rate = std::atoi(line.c_str() + kRate.size());
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4) {
      throw ValueError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 4 tab-separated fields");
    }
    ManifestEntry e;
    e.image_path = resolve(fields[0]);
    if (fields[1] != "-") e.gt_path = resolve(fields[1]);
    e.split = ParseSplit(fields[2]);
    e.label = ParseLabel(fields[3]);
    manifest.entries.push_back(std::move(e));
  }
  if (manifest.entries.empty()) {
    throw EmptyCorpusError("manifest " + path.string() + " is empty");
  }
  manifest.Validate();
  return manifest;
}

// ---------------------------------------------------------------------------
// Synthetic generator.

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct Vessel {
  double angle, offset, amplitude, frequency, phase, width, depth;
};

}  // namespace

Image SynthHealthy(uint64_t seed, int resolution) {
  if (resolution <= 0) throw ValueError("resolution must be > 0");
  Rng rng(DeriveSeed(seed, 0x4845414C));
  const double base[3] = {rng.Uniform(0.55, 0.75), rng.Uniform(0.28, 0.40),
                          rng.Uniform(0.22, 0.32)};
  const double grad_angle = rng.Uniform(0.0, kTwoPi);
  const double grad_strength = rng.Uniform(0.08, 0.16);
  const double vig_x = rng.Uniform(0.3, 0.7);
  const double vig_y = rng.Uniform(0.3, 0.7);
  const double vig_strength = rng.Uniform(0.3, 0.6);
  const int num_vessels = 2 + static_cast<int>(rng.Below(3));
  std::vector<Vessel> vessels(num_vessels);
  for (Vessel& v : vessels) {
    v.angle = rng.Uniform(0.0, M_PI);
    v.offset = rng.Uniform(-0.35, 0.35);
    v.amplitude = rng.Uniform(0.03, 0.12);
    v.frequency = rng.Uniform(1.0, 3.0);
    v.phase = rng.Uniform(0.0, kTwoPi);
    v.width = rng.Uniform(0.015, 0.03);
    v.depth = rng.Uniform(0.6, 1.0);
  }

  Image img(3, resolution, resolution);
  const double gc = std::cos(grad_angle), gs = std::sin(grad_angle);
  for (int y = 0; y < resolution; ++y) {
    const double v = (y + 0.5) / resolution - 0.5;
    for (int x = 0; x < resolution; ++x) {
      const double u = (x + 0.5) / resolution - 0.5;
      const double lin = grad_strength * (u * gc + v * gs);
      const double dx = u + 0.5 - vig_x, dy = v + 0.5 - vig_y;
      const double shade = 1.0 - vig_strength * (dx * dx + dy * dy);
      double vessel = 0.0;
      for (const Vessel& ves : vessels) {
        const double c = std::cos(ves.angle), s = std::sin(ves.angle);
        const double p = u * c + v * s;
        const double q = -u * s + v * c;
        const double centre =
            ves.offset +
            ves.amplitude * std::sin(kTwoPi * ves.frequency * p + ves.phase);
        const double d = (q - centre) / ves.width;
        vessel += ves.depth * std::exp(-0.5 * d * d);
      }
      vessel = std::min(vessel, 1.0);
      const double tint[3] = {1.0, 0.6, 0.4};
      const double stain[3] = {0.10, 0.12, 0.05};
      for (int ch = 0; ch < 3; ++ch) {
        const double value =
            base[ch] * shade + lin * tint[ch] - stain[ch] * vessel;
        img.at(ch, y, x) = std::clamp(value, 0.0, 1.0);
      }
    }
  }
  return img;
}

namespace {

struct Blob {
  double cx, cy, radius, aspect, rotation;
  int lobes;
  double lobe_amp1, lobe_phase1, lobe_amp2, lobe_phase2;

  bool Contains(double u, double v) const {
    const double dx = u - cx, dy = v - cy;
    const double c = std::cos(rotation), s = std::sin(rotation);
    const double a = (dx * c + dy * s) / aspect;
    const double b = (-dx * s + dy * c) * aspect;
    const double theta = std::atan2(b, a);
    const double r =
        radius * (1.0 + lobe_amp1 * std::sin(lobes * theta + lobe_phase1) +
                  lobe_amp2 * std::sin((lobes + 1) * theta + lobe_phase2));
    return a * a + b * b <= r * r;
  }
};

}  // namespace

AnomalousSample SynthAnomalous(uint64_t seed, int resolution) {
  AnomalousSample out;
  out.image = SynthHealthy(seed, resolution);
  Rng rng(DeriveSeed(seed, 0x414E4F4D));

  const int num_blobs = 1 + static_cast<int>(rng.Below(3));
  BinaryMask mask;
  for (;;) {
    const double total = rng.Uniform(0.04, 0.14);
    std::vector<Blob> blobs(num_blobs);
    for (Blob& b : blobs) {
      const double area = total / num_blobs;
      b.radius = std::sqrt(area / M_PI);
      b.cx = rng.Uniform(0.15, 0.85);
      b.cy = rng.Uniform(0.15, 0.85);
      b.aspect = rng.Uniform(0.8, 1.25);
      b.rotation = rng.Uniform(0.0, M_PI);
      b.lobes = 2 + static_cast<int>(rng.Below(2));
      b.lobe_amp1 = rng.Uniform(0.05, 0.15);
      b.lobe_phase1 = rng.Uniform(0.0, kTwoPi);
      b.lobe_amp2 = rng.Uniform(0.0, 0.08);
      b.lobe_phase2 = rng.Uniform(0.0, kTwoPi);
    }
    mask = BinaryMask(resolution, resolution);
    for (int y = 0; y < resolution; ++y) {
      const double v = (y + 0.5) / resolution;
      for (int x = 0; x < resolution; ++x) {
        const double u = (x + 0.5) / resolution;
        for (const Blob& b : blobs) {
          if (b.Contains(u, v)) {
            mask.at(y, x) = 1;
            break;
          }
        }
      }
    }
    const double fraction = mask.ForegroundFraction();
    if (fraction >= 0.02 && fraction <= 0.20) break;
  }

  const double tone[3] = {rng.Uniform(0.70, 0.85), rng.Uniform(0.75, 0.90),
                          rng.Uniform(0.35, 0.50)};
  const double checker_amp = rng.Uniform(0.10, 0.14);
  for (int y = 0; y < resolution; ++y) {
    for (int x = 0; x < resolution; ++x) {
      if (!mask.at(y, x)) continue;
      const double checker = ((x + y) & 1) ? checker_amp : -checker_amp;
      for (int c = 0; c < 3; ++c) {
        const double noise = rng.Uniform(-0.08, 0.08);
        out.image.at(c, y, x) = std::clamp(tone[c] + checker + noise, 0.0, 1.0);
      }
    }
  }
  out.mask = std::move(mask);
  return out;
}

}  // namespace oodmae
