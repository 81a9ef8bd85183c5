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

#ifndef OODMAE_PARAMS_H_
#define OODMAE_PARAMS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oodmae {

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  size_t offset = 0;
  size_t size = 0;
  // Subject to decoupled weight decay (matrix weights only).
  bool decay = false;
};

// Every trainable tensor of a model in one flat buffer, addressed by
// canonical name. Gradients and optimiser moments are flat buffers of the
// same length, indexed with the same offsets.
class ParamStore {
 public:
  using Id = size_t;

  Id Add(std::string name, std::vector<int> shape, bool decay);

  std::span<double> Values(Id id) {
    const ParamEntry& e = entries_[id];
    return {values_.data() + e.offset, e.size};
  }
  std::span<const double> Values(Id id) const {
    const ParamEntry& e = entries_[id];
    return {values_.data() + e.offset, e.size};
  }
  // Slice of a flat buffer laid out like this store (gradients, moments).
  std::span<double> Slice(std::span<double> flat, Id id) const {
    const ParamEntry& e = entries_[id];
    return flat.subspan(e.offset, e.size);
  }

  const ParamEntry& entry(Id id) const { return entries_[id]; }
  const std::vector<ParamEntry>& entries() const { return entries_; }
  std::optional<Id> Find(const std::string& name) const;

  std::vector<double>& flat() { return values_; }
  const std::vector<double>& flat() const { return values_; }
  size_t total_size() const { return values_.size(); }

 private:
  std::vector<ParamEntry> entries_;
  std::vector<double> values_;
};

}  // namespace oodmae

#endif  // OODMAE_PARAMS_H_
