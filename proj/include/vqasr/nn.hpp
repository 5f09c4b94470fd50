// Copyright 2026 VQASR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vqasr/tensor.hpp"

namespace vqasr {

// Parameters are plain tensors; layers are free functions over them.
// Forward passes write their intermediates into small cache structs so
// the same parameters can serve many utterances concurrently.

// ---------------------------------------------------------------------------
// Affine map: y = x W^T + b, with w of shape [out x in].

struct LinearParams {
  Tensor w;
  Tensor b;
};

struct LinearCache {
  Tensor x;
};

Tensor linear_forward(const Tensor& x, const LinearParams& p,
                      LinearCache* cache = nullptr);
// Returns dx; accumulates into dw/db.
Tensor linear_backward(const Tensor& dy, const LinearParams& p,
                       const LinearCache& cache, LinearParams& grads);

// ---------------------------------------------------------------------------
// 1-dim convolution over [T x C_in], kernel size 5 / stride 2 / padding 2
// by default. weight is [out x in x k].

struct Conv1dParams {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_size = 5;
  int stride = 2;
  int padding = 2;
  Tensor weight;
  Tensor bias;

  int out_length(int t) const {
    return (t + 2 * padding - kernel_size) / stride + 1;
  }
  std::size_t n_parameters() const {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel_size +
           static_cast<std::size_t>(out_channels);
  }
};

Conv1dParams make_conv1d(int in_channels, int out_channels, int kernel_size = 5,
                         int stride = 2, int padding = 2);

struct Conv1dCache {
  Tensor patches;  // im2col matrix [T' x (in*k)]
  int in_length = 0;
};

Tensor conv1d_forward(const Tensor& x, const Conv1dParams& p,
                      Conv1dCache* cache = nullptr);
Tensor conv1d_backward(const Tensor& dy, const Conv1dParams& p,
                       const Conv1dCache& cache, Conv1dParams& grads);

// ---------------------------------------------------------------------------
// Gated linear unit over channel pairs: y = a * sigmoid(b) where (a, b)
// are the first and second halves of the channel axis.

struct GluCache {
  Tensor x;
};

Tensor glu_forward(const Tensor& x, GluCache* cache = nullptr);
Tensor glu_backward(const Tensor& dy, const GluCache& cache);

// ---------------------------------------------------------------------------
// Row-wise layer normalization with learned gain/bias.

struct LayerNormParams {
  Tensor gain;
  Tensor bias;
};

struct LayerNormCache {
  Tensor xhat;
  std::vector<double> inv_std;
};

Tensor layer_norm_forward(const Tensor& x, const LayerNormParams& p,
                          LayerNormCache* cache = nullptr);
Tensor layer_norm_backward(const Tensor& dy, const LayerNormParams& p,
                           const LayerNormCache& cache, LayerNormParams& grads);

// ---------------------------------------------------------------------------
// Softmax over the last axis of a 2-D tensor, in place.

void softmax_rows(Tensor& x);

// ---------------------------------------------------------------------------
// ReLU.

struct ReluCache {
  Tensor x;
};

Tensor relu_forward(const Tensor& x, ReluCache* cache = nullptr);
Tensor relu_backward(const Tensor& dy, const ReluCache& cache);

// ---------------------------------------------------------------------------
// Inverted dropout; scales kept activations by 1/(1-p) during training.

struct DropoutCache {
  Tensor mask;  // 0 or 1/(1-p) per element
};

Tensor dropout_forward(const Tensor& x, double p, std::mt19937_64& rng,
                       DropoutCache* cache = nullptr);
Tensor dropout_backward(const Tensor& dy, const DropoutCache& cache);

// ---------------------------------------------------------------------------
// Multi-head scaled dot-product attention. q/k/v are [T x E]; k and v
// must share their time axis. An optional additive mask [Tq x Tk] is
// applied to the logits; causal adds -inf above the diagonal.

struct MhaParams {
  LinearParams wq, wk, wv, wo;
  int heads = 4;
};

MhaParams make_mha(int embed_dim, int heads);

struct MhaCache {
  Tensor q_in, k_in, v_in;
  Tensor q, k, v;      // projected, [T x E]
  Tensor attn;         // [heads x Tq x Tk], post-softmax
  Tensor context;      // [Tq x E]
};

Tensor mha_forward(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                   const MhaParams& p, bool causal,
                   const Tensor* additive_mask = nullptr,
                   MhaCache* cache = nullptr);
// Accumulates parameter grads; writes input grads into dq_in/dk_in/dv_in
// (self-attention callers add the three).
void mha_backward(const Tensor& dy, const MhaParams& p, const MhaCache& cache,
                  MhaParams& grads, Tensor& dq_in, Tensor& dk_in,
                  Tensor& dv_in);

// ---------------------------------------------------------------------------
// Sinusoidal positional encoding: PE[t, 2i] = sin(t / 10000^(2i/E)),
// PE[t, 2i+1] = cos(t / 10000^(2i/E)). E must be even.

Tensor sinusoidal_pe(std::size_t t_steps, std::size_t embed_dim);

// ---------------------------------------------------------------------------
// Token embedding lookup.

Tensor embedding_forward(const std::vector<int>& ids, const Tensor& table);
void embedding_backward(const Tensor& dy, const std::vector<int>& ids,
                        Tensor& dtable);

// ---------------------------------------------------------------------------
// Label-smoothed cross entropy over [T x V] logits.
// q = (1-s) * onehot + s/V; loss = mean over non-pad positions of
// -sum_v q(v) log p(v); grad wrt logits = (p - q) / n_tokens.

struct CeResult {
  double loss = 0.0;
  Tensor dlogits;
  std::size_t n_tokens = 0;
};

// Unreduced building block: per-position sums with pad rows zeroed.
// loss_sum = sum over non-pad positions; dlogits holds p - q unscaled.
CeResult label_smoothed_ce_sum(const Tensor& logits,
                               const std::vector<int>& targets,
                               double smoothing, int pad_id);

// The mean-reduced operation (loss 0 and zero grad when everything is pad).
CeResult label_smoothed_ce(const Tensor& logits, const std::vector<int>& targets,
                           double smoothing, int pad_id);

}  // namespace vqasr
