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

#ifndef OODMAE_CORPUS_H_
#define OODMAE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oodmae/image.h"

namespace oodmae {

enum class Split { kTrain, kTest };
enum class Label { kHealthy, kAnomalous };

const char* SplitName(Split split);
const char* LabelName(Label label);
Split ParseSplit(const std::string& s);
Label ParseLabel(const std::string& s);

struct ManifestEntry {
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> gt_path;
  Split split = Split::kTrain;
  Label label = Label::kHealthy;

  // File stem of the image; used to name per-image outputs.
  std::string Id() const { return image_path.stem().string(); }
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int sample_rate = 1;

  // Throws ContractViolation naming the first offending entry.
  void Validate() const;
  std::vector<ManifestEntry> Select(Split split) const;
};

struct ManifestBuild {
  DatasetManifest manifest;
  // Sampled frames that could not be opened as PNG.
  int skipped = 0;
};

// Walks `root_dir`, treating each subdirectory (or root_dir itself when it
// holds image files directly) as one frame sequence. Within a sequence the
// frames are sorted lexicographically and every `sample_rate`-th one,
// starting with the first, is kept. For the test split, a frame whose name
// also appears in the sequence's `masks/` subdirectory becomes an anomalous
// entry with that ground truth; every other frame is healthy.
ManifestBuild BuildManifest(const std::filesystem::path& root_dir,
                            int sample_rate, Split split);

// A "# sample_rate=N" header, then one line per entry:
// image_path<TAB>gt_path_or_dash<TAB>split<TAB>label. Relative paths are
// resolved against the manifest file's directory on read.
void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest);
DatasetManifest ReadManifest(const std::filesystem::path& path);

// Procedural stand-in for the healthy corpus: a smooth warm colour field
// with a few thin curvilinear "vessel" structures.
Image SynthHealthy(uint64_t seed, int resolution);

struct AnomalousSample {
  Image image;
  BinaryMask mask;
};

// SynthHealthy(seed) with one to three irregular blobs composited on top.
// Blobs use a cool, pale palette with high-frequency texture; the mask is
// the exact blob support and covers between 2% and 20% of the image.
AnomalousSample SynthAnomalous(uint64_t seed, int resolution);

}  // namespace oodmae

#endif  // OODMAE_CORPUS_H_
