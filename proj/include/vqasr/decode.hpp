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

#include <functional>
#include <vector>

#include "vqasr/model.hpp"

namespace vqasr {

struct Hypothesis {
  std::vector<int> tokens;  // ends with eos when finished
  double log_prob = 0.0;
  bool finished = false;
};

// Maps a decoder prefix (starting with bos) to logits over the vocabulary
// for the next token.
using StepScorer =
    std::function<std::vector<double>(const std::vector<int>& prefix)>;

// Standard beam search: each step expands every live hypothesis by all
// tokens, keeps the top `beam` by accumulated log-probability, and
// retires hypotheses that emit eos into a finished pool. Returns the
// best finished hypothesis, or the best live one once max_len tokens
// have been generated. Ties break by token id ascending, then by the
// hypothesis' position in the beam. No length normalization unless
// `length_normalize` is set.
Hypothesis beam_search_core(const StepScorer& scorer, int vocab_size,
                            int eos_id, int beam, int max_len,
                            bool length_normalize = false);

// Model-backed decoding over extracted features. max_len < 0 selects the
// default cap of 2 + encoder output length.
Hypothesis beam_search(const Tensor& features, const ModelParams& params,
                       int beam = 5, int max_len = -1,
                       bool length_normalize = false);

// Greedy argmax decoding (ties to the smallest token id).
std::vector<int> greedy_decode(const Tensor& features,
                               const ModelParams& params, int max_len = -1);

}  // namespace vqasr
