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

#ifndef OODMAE_LAYERS_H_
#define OODMAE_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "oodmae/matrix.h"
#include "oodmae/params.h"

// Transformer building blocks with hand-written backward passes. Layers only
// hold parameter ids; values live in a ParamStore and gradients in a flat
// buffer with the store's layout. Backward passes accumulate into `grads`.
namespace oodmae::nn {

// y = x W + b with W stored [in, out].
struct Linear {
  ParamStore::Id weight = 0;
  ParamStore::Id bias = 0;
  int in = 0;
  int out = 0;

  static Linear Create(ParamStore& store, const std::string& name, int in,
                       int out);
  void Forward(const ParamStore& store, const Matrix& x, Matrix& y) const;
  // dx may be null when the input gradient is not needed.
  void Backward(const ParamStore& store, const Matrix& x, const Matrix& dy,
                Matrix* dx, std::span<double> grads) const;
};

struct LayerNormCache {
  Matrix normalized;  // (x - mean) * rstd
  std::vector<double> rstd;
};

struct LayerNorm {
  ParamStore::Id gamma = 0;
  ParamStore::Id beta = 0;
  int dim = 0;
  double eps = 1e-6;

  static LayerNorm Create(ParamStore& store, const std::string& name, int dim);
  void Forward(const ParamStore& store, const Matrix& x, Matrix& y,
               LayerNormCache* cache) const;
  void Backward(const ParamStore& store, const LayerNormCache& cache,
                const Matrix& dy, Matrix& dx, std::span<double> grads) const;
};

struct AttentionCache {
  Matrix qkv;                 // [n, 3 * dim]
  std::vector<Matrix> probs;  // per head [n, n]
  Matrix context;             // [n, dim]
};

// Multi-head self-attention over all tokens (no masking, no class token).
struct Attention {
  Linear qkv;
  Linear proj;
  int dim = 0;
  int heads = 0;

  static Attention Create(ParamStore& store, const std::string& name, int dim,
                          int heads);
  void Forward(const ParamStore& store, const Matrix& x, Matrix& y,
               AttentionCache* cache) const;
  void Backward(const ParamStore& store, const Matrix& x,
                const AttentionCache& cache, const Matrix& dy, Matrix& dx,
                std::span<double> grads) const;
};

struct MlpCache {
  Matrix hidden;     // pre-activation
  Matrix activated;  // GELU(hidden)
};

struct Mlp {
  Linear fc1;
  Linear fc2;

  static Mlp Create(ParamStore& store, const std::string& name, int dim,
                    int hidden);
  void Forward(const ParamStore& store, const Matrix& x, Matrix& y,
               MlpCache* cache) const;
  void Backward(const ParamStore& store, const Matrix& x, const MlpCache& cache,
                const Matrix& dy, Matrix& dx, std::span<double> grads) const;
};

struct BlockCache {
  LayerNormCache norm1;
  Matrix normed1;
  AttentionCache attn;
  Matrix mid;  // x + attn(norm1(x))
  LayerNormCache norm2;
  Matrix normed2;
  MlpCache mlp;
};

// Pre-norm transformer block: x + attn(ln1(x)), then + mlp(ln2(.)).
struct Block {
  LayerNorm norm1;
  Attention attn;
  LayerNorm norm2;
  Mlp mlp;

  static Block Create(ParamStore& store, const std::string& name, int dim,
                      int heads, int mlp_ratio);
  // In place on x.
  void Forward(const ParamStore& store, Matrix& x, BlockCache* cache) const;
  // dx holds dL/d(output) on entry and dL/d(input) on return.
  void Backward(const ParamStore& store, const BlockCache& cache, Matrix& dx,
                std::span<double> grads) const;
};

double Gelu(double x);
double GeluDerivative(double x);

}  // namespace oodmae::nn

#endif  // OODMAE_LAYERS_H_
