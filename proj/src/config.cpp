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

#include "vqasr/config.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

namespace vqasr {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

void parse_into(const std::string& path,
                std::map<std::string, std::string>& out, int depth) {
  if (depth > 8) throw ConfigError("config include depth exceeded: " + path);
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config file: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (key == "include") {
      std::filesystem::path inc(value);
      if (!inc.is_absolute()) inc = base / inc;
      parse_into(inc.string(), out, depth + 1);
    } else {
      out[key] = value;
    }
  }
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs an integer, got '" +
                      value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs a number, got '" +
                      value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key +
                      "' needs a non-negative integer, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config key '" + key + "' needs a boolean, got '" + value +
                    "'");
}

}  // namespace

FeatureSet parse_feature_set(const std::string& name) {
  const std::string v = lower(name);
  if (v == "fb") return FeatureSet::fb;
  if (v == "fb+rand") return FeatureSet::fb_rand;
  if (v == "fb+pitch") return FeatureSet::fb_pitch;
  if (v == "fb+j+s" || v == "fb+js") return FeatureSet::fb_js;
  if (v == "fb+pitch+j+s" || v == "fb+pitch+js") return FeatureSet::fb_pitch_js;
  throw ConfigError("unknown feature set '" + name +
                    "' (expected fb, fb+rand, fb+pitch, fb+j+s or "
                    "fb+pitch+j+s)");
}

std::string feature_set_name(FeatureSet set) {
  switch (set) {
    case FeatureSet::fb: return "fb";
    case FeatureSet::fb_rand: return "fb+rand";
    case FeatureSet::fb_pitch: return "fb+pitch";
    case FeatureSet::fb_js: return "fb+j+s";
    case FeatureSet::fb_pitch_js: return "fb+pitch+j+s";
  }
  return "fb";
}

int feature_set_m(FeatureSet set) {
  switch (set) {
    case FeatureSet::fb: return 0;
    case FeatureSet::fb_rand: return 3;
    case FeatureSet::fb_pitch: return 3;
    case FeatureSet::fb_js: return 2;
    case FeatureSet::fb_pitch_js: return 5;
  }
  return 0;
}

ProsodySelection feature_set_prosody(FeatureSet set) {
  switch (set) {
    case FeatureSet::fb:
    case FeatureSet::fb_rand:
      return {};
    case FeatureSet::fb_pitch:
      return {ProsodyFeature::f0, ProsodyFeature::pov,
              ProsodyFeature::delta_f0};
    case FeatureSet::fb_js:
      return {ProsodyFeature::jitter, ProsodyFeature::shimmer};
    case FeatureSet::fb_pitch_js:
      return {ProsodyFeature::f0, ProsodyFeature::pov,
              ProsodyFeature::delta_f0, ProsodyFeature::jitter,
              ProsodyFeature::shimmer};
  }
  return {};
}

void ExperimentConfig::validate() const {
  if (variant == FrontEndVariant::vq && feature_set_m(features) < 1)
    throw ConfigError("vq front-end requires added features (M >= 1)");
  if (n_mels != 40 && n_mels != 80)
    throw ConfigError("n_mels must be 40 or 80");
  if (max_updates < 1) throw ConfigError("max_updates must be >= 1");
  if (checkpoint_interval < 1)
    throw ConfigError("checkpoint_interval must be >= 1");
  if (batch_frames < 1) throw ConfigError("batch_frames must be >= 1");
  if (beam < 1) throw ConfigError("beam must be >= 1");
  if (avg_checkpoints < 1) throw ConfigError("avg_checkpoints must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  model_config().validate();
}

ModelConfig ExperimentConfig::model_config() const {
  ModelConfig mc;
  mc.frontend.variant = variant;
  mc.frontend.n_spectral = n_mels;
  mc.frontend.n_prosodic = feature_set_m(features);
  mc.frontend.p_a = p_a;
  mc.frontend.p_b = p_b;
  mc.frontend.k_channels = k_channels;
  mc.frontend.l_channels = l_channels;
  mc.frontend.out_channels = embed_dim;
  mc.embed_dim = embed_dim;
  mc.encoder_layers = encoder_layers;
  mc.decoder_layers = decoder_layers;
  mc.heads = heads;
  mc.ffn_dim = ffn_dim;
  mc.dropout = dropout;
  mc.label_smoothing = label_smoothing;
  mc.vocab_size = Vocab().size();
  return mc;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  parse_into(path, out, 0);
  return out;
}

void apply_config(ExperimentConfig& c,
                  const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "train_manifest") c.train_manifest = value;
    else if (key == "dev_manifest") c.dev_manifest = value;
    else if (key == "test_manifest") c.test_manifest = value;
    else if (key == "features_dir") c.features_dir = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "feature_mode") {
      const std::string v = lower(value);
      if (v == "auto") c.feature_mode = FeatureMode::automatic;
      else if (v == "precomputed") c.feature_mode = FeatureMode::precomputed;
      else if (v == "onfly" || v == "on_the_fly")
        c.feature_mode = FeatureMode::on_the_fly;
      else throw ConfigError("feature_mode must be auto|precomputed|onfly");
    }
    else if (key == "features") c.features = parse_feature_set(value);
    else if (key == "n_mels") c.n_mels = to_int(key, value);
    else if (key == "rand_seed") c.rand_seed = to_u64(key, value);
    else if (key == "variant") {
      const std::string v = lower(value);
      if (v == "plain") c.variant = FrontEndVariant::plain;
      else if (v == "vq") c.variant = FrontEndVariant::vq;
      else throw ConfigError("variant must be plain or vq");
    }
    else if (key == "encoder_layers") c.encoder_layers = to_int(key, value);
    else if (key == "decoder_layers") c.decoder_layers = to_int(key, value);
    else if (key == "heads") c.heads = to_int(key, value);
    else if (key == "embed_dim") c.embed_dim = to_int(key, value);
    else if (key == "ffn_dim") c.ffn_dim = to_int(key, value);
    else if (key == "dropout") c.dropout = to_double(key, value);
    else if (key == "label_smoothing") c.label_smoothing = to_double(key, value);
    else if (key == "p_a") c.p_a = to_int(key, value);
    else if (key == "p_b") c.p_b = to_int(key, value);
    else if (key == "k_channels") c.k_channels = to_int(key, value);
    else if (key == "l_channels") c.l_channels = to_int(key, value);
    else if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "max_updates") c.max_updates = to_int(key, value);
    else if (key == "checkpoint_interval")
      c.checkpoint_interval = to_int(key, value);
    else if (key == "batch_frames") c.batch_frames = to_int(key, value);
    else if (key == "warmup_steps") c.warmup_steps = to_int(key, value);
    else if (key == "lr_peak") c.lr_peak = to_double(key, value);
    else if (key == "clip_norm") c.clip_norm = to_double(key, value);
    else if (key == "clip_mode") {
      const std::string v = lower(value);
      if (v == "norm") c.clip_mode = ClipMode::global_norm;
      else if (v == "value") c.clip_mode = ClipMode::element_value;
      else throw ConfigError("clip_mode must be norm or value");
    }
    else if (key == "threads") c.threads = to_int(key, value);
    else if (key == "stop_train_wer") c.stop_train_wer = to_double(key, value);
    else if (key == "beam") c.beam = to_int(key, value);
    else if (key == "avg_checkpoints") c.avg_checkpoints = to_int(key, value);
    else if (key == "length_normalize") c.length_normalize = to_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig config;
  apply_config(config, parse_config_file(path));
  config.validate();
  return config;
}

}  // namespace vqasr
