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
#include <string>
#include <vector>

#include "vqasr/audio_io.hpp"
#include "vqasr/config.hpp"
#include "vqasr/feature_matrix.hpp"
#include "vqasr/model.hpp"

namespace vqasr {

struct UtteranceData {
  std::string id;
  FeatureMatrix features;
  std::vector<int> target_ids;  // encoded transcript, no bos/eos
  std::string transcript;
};

// Spectral + selected prosodic/random channels for one utterance, CMVN
// applied jointly over all channels.
FeatureMatrix compute_utterance_features(const AudioBuffer& buf,
                                         const ExperimentConfig& config,
                                         const std::string& utterance_id);

// Loads a manifest and materializes features (from the precomputed
// feature directory or on the fly, per config.feature_mode). Unreadable
// utterances are logged to stderr and skipped; `n_failed` reports them.
std::vector<UtteranceData> load_dataset(const ExperimentConfig& config,
                                        const std::string& manifest_path,
                                        std::size_t* n_failed = nullptr);

// Length-sorted batches packed under the padded-frame budget; each entry
// lists dataset indices.
std::vector<std::vector<std::size_t>> pack_batches(
    const std::vector<UtteranceData>& dataset, int batch_frames);

struct EvalResult {
  double loss = 0.0;
  double wer = 0.0;  // corpus-level, pooled counts
  std::vector<std::string> hypotheses;  // aligned with dataset order
};

// Greedy decoding + teacher-forced loss over a dataset, eval mode.
EvalResult evaluate_greedy(const ModelParams& model,
                           const std::vector<UtteranceData>& dataset,
                           int threads);

struct TrainResult {
  std::vector<std::string> checkpoint_paths;
  std::vector<double> step_losses;  // train loss per update, index 0 = step 1
  std::string log_path;
  std::int64_t final_step = 0;
  double final_train_wer = -1.0;  // filled when stop_train_wer is active
};

// Runs the training loop: label-smoothed cross entropy, Adam with
// warmup/inverse-root schedule and gradient clipping, periodic
// checkpoints and dev evaluation. Deterministic for a fixed config and
// seed (independent of the thread count). Resumes from the newest
// checkpoint in <out_dir>/checkpoints when one exists.
TrainResult train(const ExperimentConfig& config);

// Finds ckpt_*.bin files sorted by step.
std::vector<std::string> list_checkpoints(const std::string& dir);

}  // namespace vqasr
