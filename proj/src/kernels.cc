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

#include "oodmae/kernels.h"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oodmae::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr long kGemmParallelWork = 1L << 16;
constexpr size_t kPixelParallelWork = 1 << 14;

inline int LevelOf(double score) {
  const double clamped = std::clamp(score, 0.0, 1.0);
  return static_cast<int>(std::lround(clamped * 255.0));
}

}  // namespace

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int ReflectIndex(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void Gemm(bool trans_a, bool trans_b, int m, int n, int k,
          std::span<const double> a, std::span<const double> b,
          std::span<double> c, bool accumulate) {
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  const long work = static_cast<long>(m) * n * k;

  if (!trans_b) {
    // C row i is a linear combination of B rows; the inner loop runs over
    // contiguous columns of B and C.
#pragma omp parallel for schedule(static) if (work > kGemmParallelWork)
    for (int i = 0; i < m; ++i) {
      double* ci = pc + static_cast<size_t>(i) * n;
      if (!accumulate) std::fill(ci, ci + n, 0.0);
      for (int kk = 0; kk < k; ++kk) {
        const double aik = trans_a ? pa[static_cast<size_t>(kk) * m + i]
                                   : pa[static_cast<size_t>(i) * k + kk];
        const double* bk = pb + static_cast<size_t>(kk) * n;
#pragma omp simd
        for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
      }
    }
    return;
  }

  if (!trans_a) {
    // Both operands are traversed along contiguous rows: dot products.
#pragma omp parallel for schedule(static) if (work > kGemmParallelWork)
    for (int i = 0; i < m; ++i) {
      const double* ai = pa + static_cast<size_t>(i) * k;
      double* ci = pc + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        const double* bj = pb + static_cast<size_t>(j) * k;
        double sum = 0.0;
#pragma omp simd reduction(+ : sum)
        for (int kk = 0; kk < k; ++kk) sum += ai[kk] * bj[kk];
        ci[j] = accumulate ? ci[j] + sum : sum;
      }
    }
    return;
  }

  // trans_a && trans_b: rarely used, no special layout.
#pragma omp parallel for schedule(static) if (work > kGemmParallelWork)
  for (int i = 0; i < m; ++i) {
    double* ci = pc + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int kk = 0; kk < k; ++kk) {
        sum += pa[static_cast<size_t>(kk) * m + i] *
               pb[static_cast<size_t>(j) * k + kk];
      }
      ci[j] = accumulate ? ci[j] + sum : sum;
    }
  }
}

void AvgPoolReflect(std::span<const double> in, int height, int width,
                    int kernel, std::span<double> out) {
  const int lo = (kernel - 1) / 2;
  const double inv = 1.0 / (static_cast<double>(kernel) * kernel);
  std::vector<double> rows(static_cast<size_t>(height) * width);
  const size_t pixels = static_cast<size_t>(height) * width;

  // Horizontal window sums, then vertical sums of those.
#pragma omp parallel for schedule(static) if (pixels > kPixelParallelWork)
  for (int y = 0; y < height; ++y) {
    const double* src = in.data() + static_cast<size_t>(y) * width;
    double* dst = rows.data() + static_cast<size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      for (int d = 0; d < kernel; ++d) {
        sum += src[ReflectIndex(x - lo + d, width)];
      }
      dst[x] = sum;
    }
  }
#pragma omp parallel for schedule(static) if (pixels > kPixelParallelWork)
  for (int y = 0; y < height; ++y) {
    double* dst = out.data() + static_cast<size_t>(y) * width;
    std::fill(dst, dst + width, 0.0);
    for (int d = 0; d < kernel; ++d) {
      const double* src =
          rows.data() +
          static_cast<size_t>(ReflectIndex(y - lo + d, height)) * width;
#pragma omp simd
      for (int x = 0; x < width; ++x) dst[x] += src[x];
    }
#pragma omp simd
    for (int x = 0; x < width; ++x) dst[x] *= inv;
  }
}

void LevelHistograms(std::span<const double> scores,
                     std::span<const uint8_t> gt, LevelHistogram& foreground,
                     LevelHistogram& background) {
  foreground.fill(0);
  background.fill(0);
  const size_t n = scores.size();
#pragma omp parallel if (n > kPixelParallelWork)
  {
    // Row 1 is foreground; indexing by the class bit avoids a branch.
    int64_t local[2][256] = {};
#pragma omp for schedule(static) nowait
    for (size_t i = 0; i < n; ++i) {
      ++local[gt[i] != 0][LevelOf(scores[i])];
    }
#pragma omp critical
    {
      for (int l = 0; l < 256; ++l) {
        foreground[l] += local[1][l];
        background[l] += local[0][l];
      }
    }
  }
}

namespace ref {

void Gemm(bool trans_a, bool trans_b, int m, int n, int k,
          std::span<const double> a, std::span<const double> b,
          std::span<double> c, bool accumulate) {
  auto a_at = [&](int i, int kk) {
    return trans_a ? a[static_cast<size_t>(kk) * m + i]
                   : a[static_cast<size_t>(i) * k + kk];
  };
  auto b_at = [&](int kk, int j) {
    return trans_b ? b[static_cast<size_t>(j) * k + kk]
                   : b[static_cast<size_t>(kk) * n + j];
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int kk = 0; kk < k; ++kk) sum += a_at(i, kk) * b_at(kk, j);
      double& dst = c[static_cast<size_t>(i) * n + j];
      dst = accumulate ? dst + sum : sum;
    }
  }
}

void AvgPoolReflect(std::span<const double> in, int height, int width,
                    int kernel, std::span<double> out) {
  const int lo = (kernel - 1) / 2;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      for (int dy = 0; dy < kernel; ++dy) {
        const int sy = ReflectIndex(y - lo + dy, height);
        for (int dx = 0; dx < kernel; ++dx) {
          const int sx = ReflectIndex(x - lo + dx, width);
          sum += in[static_cast<size_t>(sy) * width + sx];
        }
      }
      out[static_cast<size_t>(y) * width + x] =
          sum / (static_cast<double>(kernel) * kernel);
    }
  }
}

void LevelHistograms(std::span<const double> scores,
                     std::span<const uint8_t> gt, LevelHistogram& foreground,
                     LevelHistogram& background) {
  foreground.fill(0);
  background.fill(0);
  for (size_t i = 0; i < scores.size(); ++i) {
    const int level = LevelOf(scores[i]);
    (gt[i] ? foreground : background)[level] += 1;
  }
}

}  // namespace ref

}  // namespace oodmae::kernels
