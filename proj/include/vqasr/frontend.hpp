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

#include <utility>
#include <vector>

#include "vqasr/nn.hpp"
#include "vqasr/tensor.hpp"

namespace vqasr {

enum class FrontEndVariant { plain, vq };

// Dimensions of the convolutional front-ends. The plain variant convolves
// the concatenated spectral+prosodic input in one block; the vq variant
// runs two independent blocks (A: spectral -> K channels, B: prosodic ->
// L channels) and concatenates, with K + L = O so both variants emit the
// same output width.
struct FrontEndConfig {
  FrontEndVariant variant = FrontEndVariant::plain;
  int n_spectral = 40;   // N
  int n_prosodic = 0;    // M, up to 5
  int p_a = 512;         // block A / plain hidden width (post-GLU)
  int p_b = 256;         // block B hidden width (post-GLU)
  int k_channels = 192;  // K, block A output
  int l_channels = 64;   // L, block B output
  int out_channels = 256;  // O
  int kernel_size = 5;
  int stride = 2;
  int padding = 2;

  void validate() const;
  int input_channels() const { return n_spectral + n_prosodic; }
  // Temporal length after the two strided convolutions.
  int out_length(int t) const;
};

struct FrontEndParams {
  FrontEndConfig cfg;
  // plain: conv1 (N+M -> 2*p_a), conv2 (p_a -> 2*O)
  // vq:    a1 (N -> 2*p_a), a2 (p_a -> 2*K); b1 (M -> 2*p_b), b2 (p_b -> 2*L)
  Conv1dParams conv1, conv2;      // plain
  Conv1dParams a1, a2, b1, b2;    // vq
};

FrontEndParams make_frontend(const FrontEndConfig& cfg);
void init_frontend(FrontEndParams& params, std::mt19937_64& rng);
std::size_t frontend_parameter_count(const FrontEndConfig& cfg);

struct FrontEndOutput {
  Tensor features;  // [T' x O], positional encoding added
  // Inclusive span of original frames feeding each output step.
  std::vector<std::pair<int, int>> frame_map;
};

struct FrontEndCache {
  Conv1dCache c1, c2, a1, a2, b1, b2;
  GluCache g1, g2, ga1, ga2, gb1, gb2;
};

// Single block over the concatenated [T x (N+M)] input.
FrontEndOutput plain_frontend(const Tensor& spectral_plus_prosody,
                              const FrontEndParams& params,
                              FrontEndCache* cache = nullptr);

// Blocks A and B convolved independently, outputs concatenated channelwise.
FrontEndOutput vq_frontend(const Tensor& spectral, const Tensor& prosody,
                           const FrontEndParams& params,
                           FrontEndCache* cache = nullptr);

// Backward through the plain block; returns d(input).
Tensor plain_frontend_backward(const Tensor& dout, const FrontEndParams& params,
                               const FrontEndCache& cache,
                               FrontEndParams& grads);

// Backward through both blocks; returns (d spectral, d prosody).
std::pair<Tensor, Tensor> vq_frontend_backward(const Tensor& dout,
                                               const FrontEndParams& params,
                                               const FrontEndCache& cache,
                                               FrontEndParams& grads);

}  // namespace vqasr
