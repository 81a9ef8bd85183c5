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

#ifndef OODMAE_MATRIX_H_
#define OODMAE_MATRIX_H_

#include <span>
#include <vector>

namespace oodmae {

// Row-major dense matrix of doubles. Token sequences are [tokens, features].
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int r, int c) {
    return data[static_cast<size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }
  std::span<double> row_span(int r) {
    return {row(r), static_cast<size_t>(cols)};
  }
  std::span<const double> row_span(int r) const {
    return {row(r), static_cast<size_t>(cols)};
  }
  size_t size() const { return data.size(); }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

}  // namespace oodmae

#endif  // OODMAE_MATRIX_H_
