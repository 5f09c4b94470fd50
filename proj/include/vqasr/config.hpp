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
#include <map>
#include <string>
#include <vector>

#include "vqasr/model.hpp"
#include "vqasr/prosody.hpp"

namespace vqasr {

// Which channels accompany the filterbanks.
enum class FeatureSet { fb, fb_rand, fb_pitch, fb_js, fb_pitch_js };

FeatureSet parse_feature_set(const std::string& name);
std::string feature_set_name(FeatureSet set);
int feature_set_m(FeatureSet set);  // number of added channels
// Prosodic features of the set (empty for fb and fb_rand).
ProsodySelection feature_set_prosody(FeatureSet set);

enum class FeatureMode { automatic, precomputed, on_the_fly };

struct ExperimentConfig {
  // data
  std::string train_manifest;
  std::string dev_manifest;
  std::string test_manifest;
  std::string features_dir;  // precomputed features (index.tsv inside)
  FeatureMode feature_mode = FeatureMode::automatic;
  std::string out_dir = "run";

  // features
  FeatureSet features = FeatureSet::fb;
  int n_mels = 40;
  std::uint64_t rand_seed = 0;  // controls the random control channels

  // architecture
  FrontEndVariant variant = FrontEndVariant::plain;
  int encoder_layers = 3;
  int decoder_layers = 3;
  int heads = 4;
  int embed_dim = 256;
  int ffn_dim = 1024;
  double dropout = 0.1;
  double label_smoothing = 0.1;
  int p_a = 512;
  int p_b = 256;
  int k_channels = 192;
  int l_channels = 64;

  // training
  std::uint64_t seed = 1;
  int max_updates = 3000;
  int checkpoint_interval = 250;
  int batch_frames = 2000;
  int warmup_steps = 500;
  double lr_peak = 0.002;
  double clip_norm = 10.0;
  ClipMode clip_mode = ClipMode::global_norm;
  int threads = 2;
  // stop once train-set greedy WER (checked at checkpoint intervals)
  // drops to this value; negative disables
  double stop_train_wer = -1.0;

  // decoding
  int beam = 5;
  int avg_checkpoints = 10;
  bool length_normalize = false;

  void validate() const;
  ModelConfig model_config() const;
};

// Flat UTF-8 key=value file; '#' starts a comment; an `include = path`
// line splices another file (relative to the including file). Later keys
// override earlier ones.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies key=value pairs onto a config. Unknown keys raise ConfigError
// naming the key.
void apply_config(ExperimentConfig& config,
                  const std::map<std::string, std::string>& kv);

ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace vqasr
