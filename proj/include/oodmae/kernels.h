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

#ifndef OODMAE_KERNELS_H_
#define OODMAE_KERNELS_H_

#include <array>
#include <cstdint>
#include <span>

namespace oodmae::kernels {

// Row-major GEMM: C[m,n] = op(A) * op(B), or C += op(A) * op(B) when
// `accumulate`. op(A) is [m,k]; A is stored [k,m] when `trans_a`.
// op(B) is [k,n]; B is stored [n,k] when `trans_b`.
//
// Rows of C are distributed across OpenMP threads once the problem is large
// enough. Each element of C is produced by exactly one thread in a fixed
// order, so results do not depend on the thread count.
void Gemm(bool trans_a, bool trans_b, int m, int n, int k,
          std::span<const double> a, std::span<const double> b,
          std::span<double> c, bool accumulate);

// Mean over a kernel x kernel window (stride 1) with reflect padding; output
// has the input's size. For even kernels the window extends one pixel
// further toward the bottom-right.
void AvgPoolReflect(std::span<const double> in, int height, int width,
                    int kernel, std::span<double> out);

using LevelHistogram = std::array<int64_t, 256>;

// Histograms of round(255 * score) split by ground-truth class. Scores are
// clamped to [0, 1] first.
void LevelHistograms(std::span<const double> scores,
                     std::span<const uint8_t> gt, LevelHistogram& foreground,
                     LevelHistogram& background);

// Reflect-101 index into [0, n): -1 -> 1, n -> n - 2.
int ReflectIndex(int i, int n);

// Loop-for-loop serial versions of the kernels above. Kept as the reference
// the parallel versions are tested and benchmarked against.
namespace ref {

void Gemm(bool trans_a, bool trans_b, int m, int n, int k,
          std::span<const double> a, std::span<const double> b,
          std::span<double> c, bool accumulate);

void AvgPoolReflect(std::span<const double> in, int height, int width,
                    int kernel, std::span<double> out);

void LevelHistograms(std::span<const double> scores,
                     std::span<const uint8_t> gt, LevelHistogram& foreground,
                     LevelHistogram& background);

}  // namespace ref

// Number of threads OpenMP regions would use (1 without OpenMP).
int MaxThreads();

}  // namespace oodmae::kernels

#endif  // OODMAE_KERNELS_H_
