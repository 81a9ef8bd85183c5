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

#include "oodmae/layers.h"

#include <algorithm>
#include <cmath>

#include "oodmae/error.h"
#include "oodmae/kernels.h"

namespace oodmae {

ParamStore::Id ParamStore::Add(std::string name, std::vector<int> shape,
                               bool decay) {
  ParamEntry e;
  e.name = std::move(name);
  e.shape = std::move(shape);
  e.size = 1;
  for (int d : e.shape) e.size *= static_cast<size_t>(d);
  e.offset = values_.size();
  e.decay = decay;
  values_.resize(values_.size() + e.size, 0.0);
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

std::optional<ParamStore::Id> ParamStore::Find(const std::string& name) const {
  for (Id i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

namespace nn {

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double GeluDerivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) * (0.5 * M_2_SQRTPI * M_SQRT1_2);
  return cdf + x * pdf;
}

Linear Linear::Create(ParamStore& store, const std::string& name, int in,
                      int out) {
  Linear l;
  l.in = in;
  l.out = out;
  l.weight = store.Add(name + ".weight", {in, out}, /*decay=*/true);
  l.bias = store.Add(name + ".bias", {out}, /*decay=*/false);
  return l;
}

void Linear::Forward(const ParamStore& store, const Matrix& x,
                     Matrix& y) const {
  if (x.cols != in) throw ShapeError("Linear: input width mismatch");
  y = Matrix(x.rows, out);
  const auto b = store.Values(bias);
  for (int r = 0; r < x.rows; ++r) std::copy(b.begin(), b.end(), y.row(r));
  kernels::Gemm(false, false, x.rows, out, in, x.data, store.Values(weight),
                y.data, /*accumulate=*/true);
}

void Linear::Backward(const ParamStore& store, const Matrix& x,
                      const Matrix& dy, Matrix* dx,
                      std::span<double> grads) const {
  auto dw = store.Slice(grads, weight);
  auto db = store.Slice(grads, bias);
  kernels::Gemm(true, false, in, out, x.rows, x.data, dy.data, dw,
                /*accumulate=*/true);
  for (int r = 0; r < dy.rows; ++r) {
    const double* row = dy.row(r);
    for (int j = 0; j < out; ++j) db[j] += row[j];
  }
  if (dx != nullptr) {
    *dx = Matrix(dy.rows, in);
    kernels::Gemm(false, true, dy.rows, in, out, dy.data, store.Values(weight),
                  dx->data, /*accumulate=*/false);
  }
}

LayerNorm LayerNorm::Create(ParamStore& store, const std::string& name,
                            int dim) {
  LayerNorm n;
  n.dim = dim;
  n.gamma = store.Add(name + ".weight", {dim}, /*decay=*/false);
  n.beta = store.Add(name + ".bias", {dim}, /*decay=*/false);
  auto g = store.Values(n.gamma);
  std::fill(g.begin(), g.end(), 1.0);
  return n;
}

void LayerNorm::Forward(const ParamStore& store, const Matrix& x, Matrix& y,
                        LayerNormCache* cache) const {
  if (x.cols != dim) throw ShapeError("LayerNorm: width mismatch");
  const auto g = store.Values(gamma);
  const auto b = store.Values(beta);
  y = Matrix(x.rows, dim);
  if (cache != nullptr) {
    cache->normalized = Matrix(x.rows, dim);
    cache->rstd.assign(x.rows, 0.0);
  }
  for (int r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double mean = 0.0;
    for (int j = 0; j < dim; ++j) mean += xr[j];
    mean /= dim;
    double var = 0.0;
    for (int j = 0; j < dim; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= dim;
    const double rstd = 1.0 / std::sqrt(var + eps);
    double* yr = y.row(r);
    for (int j = 0; j < dim; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      yr[j] = xhat * g[j] + b[j];
      if (cache != nullptr) cache->normalized(r, j) = xhat;
    }
    if (cache != nullptr) cache->rstd[r] = rstd;
  }
}

void LayerNorm::Backward(const ParamStore& store, const LayerNormCache& cache,
                         const Matrix& dy, Matrix& dx,
                         std::span<double> grads) const {
  const auto g = store.Values(gamma);
  auto dg = store.Slice(grads, gamma);
  auto db = store.Slice(grads, beta);
  dx = Matrix(dy.rows, dim);
  std::vector<double> dxhat(dim);
  for (int r = 0; r < dy.rows; ++r) {
    const double* dyr = dy.row(r);
    const double* xhat = cache.normalized.row(r);
    double mean_d = 0.0, mean_dx = 0.0;
    for (int j = 0; j < dim; ++j) {
      dg[j] += dyr[j] * xhat[j];
      db[j] += dyr[j];
      dxhat[j] = dyr[j] * g[j];
      mean_d += dxhat[j];
      mean_dx += dxhat[j] * xhat[j];
    }
    mean_d /= dim;
    mean_dx /= dim;
    double* out = dx.row(r);
    for (int j = 0; j < dim; ++j) {
      out[j] = cache.rstd[r] * (dxhat[j] - mean_d - xhat[j] * mean_dx);
    }
  }
}

Attention Attention::Create(ParamStore& store, const std::string& name, int dim,
                            int heads) {
  Attention a;
  a.dim = dim;
  a.heads = heads;
  a.qkv = Linear::Create(store, name + ".qkv", dim, 3 * dim);
  a.proj = Linear::Create(store, name + ".proj", dim, dim);
  return a;
}

namespace {

// Copies columns [col, col + width) of `src` into a contiguous matrix.
Matrix Columns(const Matrix& src, int col, int width) {
  Matrix out(src.rows, width);
  for (int r = 0; r < src.rows; ++r) {
    std::copy_n(src.row(r) + col, width, out.row(r));
  }
  return out;
}

void AddColumns(const Matrix& block, int col, Matrix& dst) {
  for (int r = 0; r < block.rows; ++r) {
    const double* s = block.row(r);
    double* d = dst.row(r) + col;
    for (int j = 0; j < block.cols; ++j) d[j] += s[j];
  }
}

void SoftmaxRows(Matrix& m) {
  for (int r = 0; r < m.rows; ++r) {
    double* row = m.row(r);
    const double peak = *std::max_element(row, row + m.cols);
    double sum = 0.0;
    for (int j = 0; j < m.cols; ++j) {
      row[j] = std::exp(row[j] - peak);
      sum += row[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < m.cols; ++j) row[j] *= inv;
  }
}

}  // namespace

void Attention::Forward(const ParamStore& store, const Matrix& x, Matrix& y,
                        AttentionCache* cache) const {
  const int n = x.rows;
  const int head_dim = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Matrix qkv_out;
  qkv.Forward(store, x, qkv_out);
  Matrix context(n, dim);
  if (cache != nullptr) cache->probs.assign(heads, Matrix());
  for (int h = 0; h < heads; ++h) {
    const Matrix q = Columns(qkv_out, h * head_dim, head_dim);
    const Matrix k = Columns(qkv_out, dim + h * head_dim, head_dim);
    const Matrix v = Columns(qkv_out, 2 * dim + h * head_dim, head_dim);
    Matrix scores(n, n);
    kernels::Gemm(false, true, n, n, head_dim, q.data, k.data, scores.data,
                  false);
    for (double& s : scores.data) s *= scale;
    SoftmaxRows(scores);
    Matrix out(n, head_dim);
    kernels::Gemm(false, false, n, head_dim, n, scores.data, v.data, out.data,
                  false);
    AddColumns(out, h * head_dim, context);
    if (cache != nullptr) cache->probs[h] = std::move(scores);
  }
  proj.Forward(store, context, y);
  if (cache != nullptr) {
    cache->qkv = std::move(qkv_out);
    cache->context = std::move(context);
  }
}

void Attention::Backward(const ParamStore& store, const Matrix& x,
                         const AttentionCache& cache, const Matrix& dy,
                         Matrix& dx, std::span<double> grads) const {
  const int n = x.rows;
  const int head_dim = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Matrix dcontext;
  proj.Backward(store, cache.context, dy, &dcontext, grads);
  Matrix dqkv(n, 3 * dim);
  for (int h = 0; h < heads; ++h) {
    const Matrix q = Columns(cache.qkv, h * head_dim, head_dim);
    const Matrix k = Columns(cache.qkv, dim + h * head_dim, head_dim);
    const Matrix v = Columns(cache.qkv, 2 * dim + h * head_dim, head_dim);
    const Matrix dout = Columns(dcontext, h * head_dim, head_dim);
    const Matrix& p = cache.probs[h];

    Matrix dv(n, head_dim);
    kernels::Gemm(true, false, n, head_dim, n, p.data, dout.data, dv.data,
                  false);
    Matrix dp(n, n);
    kernels::Gemm(false, true, n, n, head_dim, dout.data, v.data, dp.data,
                  false);
    // Softmax Jacobian, row by row: dS = P * (dP - <dP, P>).
    for (int r = 0; r < n; ++r) {
      const double* pr = p.row(r);
      double* dr = dp.row(r);
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += dr[j] * pr[j];
      for (int j = 0; j < n; ++j) dr[j] = pr[j] * (dr[j] - dot) * scale;
    }
    Matrix dq(n, head_dim);
    kernels::Gemm(false, false, n, head_dim, n, dp.data, k.data, dq.data,
                  false);
    Matrix dk(n, head_dim);
    kernels::Gemm(true, false, n, head_dim, n, dp.data, q.data, dk.data, false);
    AddColumns(dq, h * head_dim, dqkv);
    AddColumns(dk, dim + h * head_dim, dqkv);
    AddColumns(dv, 2 * dim + h * head_dim, dqkv);
  }
  qkv.Backward(store, x, dqkv, &dx, grads);
}

Mlp Mlp::Create(ParamStore& store, const std::string& name, int dim,
                int hidden) {
  Mlp m;
  m.fc1 = Linear::Create(store, name + ".fc1", dim, hidden);
  m.fc2 = Linear::Create(store, name + ".fc2", hidden, dim);
  return m;
}

void Mlp::Forward(const ParamStore& store, const Matrix& x, Matrix& y,
                  MlpCache* cache) const {
  Matrix hidden;
  fc1.Forward(store, x, hidden);
  Matrix activated(hidden.rows, hidden.cols);
  for (size_t i = 0; i < hidden.size(); ++i) {
    activated.data[i] = Gelu(hidden.data[i]);
  }
  fc2.Forward(store, activated, y);
  if (cache != nullptr) {
    cache->hidden = std::move(hidden);
    cache->activated = std::move(activated);
  }
}

void Mlp::Backward(const ParamStore& store, const Matrix& x,
                   const MlpCache& cache, const Matrix& dy, Matrix& dx,
                   std::span<double> grads) const {
  Matrix dact;
  fc2.Backward(store, cache.activated, dy, &dact, grads);
  for (size_t i = 0; i < dact.size(); ++i) {
    dact.data[i] *= GeluDerivative(cache.hidden.data[i]);
  }
  fc1.Backward(store, x, dact, &dx, grads);
}

Block Block::Create(ParamStore& store, const std::string& name, int dim,
                    int heads, int mlp_ratio) {
  Block b;
  b.norm1 = LayerNorm::Create(store, name + ".norm1", dim);
  b.attn = Attention::Create(store, name + ".attn", dim, heads);
  b.norm2 = LayerNorm::Create(store, name + ".norm2", dim);
  b.mlp = Mlp::Create(store, name + ".mlp", dim, dim * mlp_ratio);
  return b;
}

void Block::Forward(const ParamStore& store, Matrix& x,
                    BlockCache* cache) const {
  Matrix normed, branch;
  norm1.Forward(store, x, normed, cache ? &cache->norm1 : nullptr);
  attn.Forward(store, normed, branch, cache ? &cache->attn : nullptr);
  if (cache != nullptr) cache->normed1 = std::move(normed);
  for (size_t i = 0; i < x.size(); ++i) x.data[i] += branch.data[i];
  if (cache != nullptr) cache->mid = x;

  norm2.Forward(store, x, normed, cache ? &cache->norm2 : nullptr);
  mlp.Forward(store, normed, branch, cache ? &cache->mlp : nullptr);
  if (cache != nullptr) cache->normed2 = std::move(normed);
  for (size_t i = 0; i < x.size(); ++i) x.data[i] += branch.data[i];
}

void Block::Backward(const ParamStore& store, const BlockCache& cache,
                     Matrix& dx, std::span<double> grads) const {
  Matrix dbranch, dnorm;
  mlp.Backward(store, cache.normed2, cache.mlp, dx, dbranch, grads);
  norm2.Backward(store, cache.norm2, dbranch, dnorm, grads);
  for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += dnorm.data[i];

  attn.Backward(store, cache.normed1, cache.attn, dx, dbranch, grads);
  norm1.Backward(store, cache.norm1, dbranch, dnorm, grads);
  for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += dnorm.data[i];
}

}  // namespace nn
}  // namespace oodmae
