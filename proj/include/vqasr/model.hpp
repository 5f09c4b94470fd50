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
#include <functional>
#include <string>
#include <vector>

#include "vqasr/feature_matrix.hpp"
#include "vqasr/frontend.hpp"
#include "vqasr/nn.hpp"
#include "vqasr/optim.hpp"

namespace vqasr {

// Character inventory: pad/bos/eos, space, apostrophe, a-z (31 tokens).
class Vocab {
 public:
  static constexpr int pad_id = 0;
  static constexpr int bos_id = 1;
  static constexpr int eos_id = 2;

  int size() const { return 31; }

  // Lowercases; characters outside [a-z' ] are dropped.
  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;
};

struct ModelConfig {
  FrontEndConfig frontend;
  int embed_dim = 256;
  int encoder_layers = 3;
  int decoder_layers = 3;
  int heads = 4;
  int ffn_dim = 1024;
  double dropout = 0.1;
  double label_smoothing = 0.1;
  int vocab_size = 31;

  void validate() const;
};

struct EncoderLayerParams {
  LayerNormParams ln1, ln2;
  MhaParams self_attn;
  LinearParams ff1, ff2;
};

struct DecoderLayerParams {
  LayerNormParams ln1, ln2, ln3;
  MhaParams self_attn, cross_attn;
  LinearParams ff1, ff2;
};

// Pre-norm transformer over front-end outputs; decoder output projection
// is tied to the token embedding.
struct ModelParams {
  ModelConfig cfg;
  FrontEndParams frontend;
  std::vector<EncoderLayerParams> encoder;
  LayerNormParams encoder_ln;
  std::vector<DecoderLayerParams> decoder;
  LayerNormParams decoder_ln;
  Tensor embedding;  // [V x E]
};

ModelParams make_model(const ModelConfig& cfg);
void init_model(ModelParams& params, std::uint64_t seed);

// Same tensor layout as make_model but all-zero (layer norm gains
// included), for use as a gradient accumulator.
ModelParams make_gradient_buffer(const ModelConfig& cfg);

// Stable walk over every parameter tensor, in checkpoint manifest order.
void for_each_tensor(ModelParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn);

// Named value/grad pairs for the optimizer and checkpointing. `grads`
// must be a same-config ModelParams acting as the gradient accumulator;
// pass nullptr when only values are needed.
std::vector<ParamRef> collect_params(ModelParams& values, ModelParams* grads);

// Exact trainable-parameter total, computed analytically.
std::size_t count_parameters(const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Forward / backward over one utterance. Features are [T x (N+M)] with
// spectral channels first; the vq variant splits them internally.

struct EncoderLayerCache {
  LayerNormCache ln1, ln2;
  MhaCache attn;
  LinearCache ff1, ff2;
  ReluCache relu;
  DropoutCache drop1, drop2;
};

struct DecoderLayerCache {
  LayerNormCache ln1, ln2, ln3;
  MhaCache self_attn, cross_attn;
  LinearCache ff1, ff2;
  ReluCache relu;
  DropoutCache drop1, drop2, drop3;
};

struct UtteranceCache {
  FrontEndCache frontend;
  DropoutCache frontend_drop;
  std::vector<EncoderLayerCache> enc;
  LayerNormCache enc_ln;
  std::vector<DecoderLayerCache> dec;
  LayerNormCache dec_ln;
  std::vector<int> dec_input;
  Tensor dec_out;     // post final norm, for the tied projection backward
  Tensor enc_memory;  // post final norm
};

// dec_input must start with bos. Returns logits [len(dec_input) x V].
// With train=true, dropout draws from `rng` and caches fill for backward.
Tensor model_forward_utterance(const ModelParams& params, const Tensor& features,
                               const std::vector<int>& dec_input, bool train,
                               std::mt19937_64* rng, UtteranceCache* cache);

void model_backward_utterance(const ModelParams& params,
                              const UtteranceCache& cache,
                              const Tensor& dlogits, ModelParams& grads);

// Evaluation-mode helpers for decoding.
Tensor encode_utterance(const ModelParams& params, const Tensor& features);
Tensor decoder_logits(const ModelParams& params, const Tensor& memory,
                      const std::vector<int>& prefix);

// ---------------------------------------------------------------------------
// Padded batch.

struct Batch {
  Tensor features;                 // [B x T_max x C], zero padded
  std::vector<int> feature_lengths;
  std::vector<int> targets;        // [B x L_max], pad_id padded, no bos/eos
  std::vector<int> target_lengths;
  std::size_t batch_size = 0;
  std::size_t target_max = 0;

  // Slice of utterance b's features at its true length.
  Tensor utterance_features(std::size_t b) const;
  // Decoder input [bos, t1..tn] and CE targets [t1..tn, eos] for b.
  std::vector<int> decoder_input(std::size_t b) const;
  std::vector<int> ce_targets(std::size_t b) const;
};

Batch make_batch(const std::vector<const FeatureMatrix*>& features,
                 const std::vector<std::vector<int>>& targets);

// Eval-mode batched forward: logits [B x (L_max+1) x V]; rows past an
// utterance's target length are zero. Pad frames never influence logits
// (each utterance is processed at its true length).
Tensor forward(const Batch& batch, const ModelParams& params);

}  // namespace vqasr
