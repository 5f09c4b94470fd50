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

#include "vqasr/decode.hpp"

#include <algorithm>
#include <cmath>

namespace vqasr {

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
  double max_v = logits[0];
  for (double v : logits) max_v = std::max(max_v, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max_v);
  const double log_sum = std::log(sum) + max_v;
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_sum;
  return out;
}

double final_score(const Hypothesis& h, bool length_normalize) {
  if (!length_normalize || h.tokens.empty()) return h.log_prob;
  return h.log_prob / static_cast<double>(h.tokens.size());
}

// Deterministic comparison for the final pick: higher score first, then
// shorter, then lexicographically smaller token sequence.
bool better_final(const Hypothesis& a, const Hypothesis& b,
                  bool length_normalize) {
  const double sa = final_score(a, length_normalize);
  const double sb = final_score(b, length_normalize);
  if (sa != sb) return sa > sb;
  if (a.tokens.size() != b.tokens.size())
    return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace

Hypothesis beam_search_core(const StepScorer& scorer, int vocab_size,
                            int eos_id, int beam, int max_len,
                            bool length_normalize) {
  if (beam < 1) throw ConfigError("beam size must be >= 1");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");

  std::vector<Hypothesis> live(1);
  std::vector<Hypothesis> finished;

  struct Candidate {
    double score;
    int parent;
    int token;
  };

  for (int step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    candidates.reserve(live.size() * static_cast<std::size_t>(vocab_size));
    for (std::size_t h = 0; h < live.size(); ++h) {
      std::vector<int> prefix;
      prefix.reserve(live[h].tokens.size() + 1);
      prefix.push_back(Vocab::bos_id);
      prefix.insert(prefix.end(), live[h].tokens.begin(),
                    live[h].tokens.end());
      const std::vector<double> logp = log_softmax(scorer(prefix));
      if (static_cast<int>(logp.size()) != vocab_size)
        throw ShapeMismatchError("step scorer returned wrong vocabulary size");
      for (int v = 0; v < vocab_size; ++v)
        candidates.push_back(
            {live[h].log_prob + logp[static_cast<std::size_t>(v)],
             static_cast<int>(h), v});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.score != b.score) return a.score > b.score;
                       if (a.token != b.token) return a.token < b.token;
                       return a.parent < b.parent;
                     });

    // Keep the top `beam` expansions; eos-terminated ones retire to the
    // finished pool and free their slot for the next step.
    std::vector<Hypothesis> next;
    next.reserve(static_cast<std::size_t>(beam));
    int selected = 0;
    for (const Candidate& cand : candidates) {
      if (selected == beam) break;
      ++selected;
      Hypothesis h = live[static_cast<std::size_t>(cand.parent)];
      h.tokens.push_back(cand.token);
      h.log_prob = cand.score;
      if (cand.token == eos_id) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  const std::vector<Hypothesis>& pool = finished.empty() ? live : finished;
  if (pool.empty()) return Hypothesis{};  // max_len 0 edge; not reachable
  const Hypothesis* best = &pool.front();
  for (const Hypothesis& h : pool)
    if (better_final(h, *best, length_normalize)) best = &h;
  return *best;
}

Hypothesis beam_search(const Tensor& features, const ModelParams& params,
                       int beam, int max_len, bool length_normalize) {
  const Tensor memory = encode_utterance(params, features);
  if (max_len < 0) max_len = 2 + static_cast<int>(memory.dim(0));
  StepScorer scorer = [&](const std::vector<int>& prefix) {
    const Tensor logits = decoder_logits(params, memory, prefix);
    const std::size_t last = logits.dim(0) - 1;
    std::vector<double> out(logits.dim(1));
    for (std::size_t v = 0; v < logits.dim(1); ++v) out[v] = logits.at(last, v);
    return out;
  };
  return beam_search_core(scorer, params.cfg.vocab_size, Vocab::eos_id, beam,
                          max_len, length_normalize);
}

std::vector<int> greedy_decode(const Tensor& features,
                               const ModelParams& params, int max_len) {
  const Tensor memory = encode_utterance(params, features);
  if (max_len < 0) max_len = 2 + static_cast<int>(memory.dim(0));
  std::vector<int> prefix{Vocab::bos_id};
  for (int step = 0; step < max_len; ++step) {
    const Tensor logits = decoder_logits(params, memory, prefix);
    const std::size_t last = logits.dim(0) - 1;
    int arg = 0;
    double best = logits.at(last, 0);
    for (std::size_t v = 1; v < logits.dim(1); ++v) {
      if (logits.at(last, v) > best) {
        best = logits.at(last, v);
        arg = static_cast<int>(v);
      }
    }
    prefix.push_back(arg);
    if (arg == Vocab::eos_id) break;
  }
  return {prefix.begin() + 1, prefix.end()};
}

}  // namespace vqasr
