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

#include "vqasr/train.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "vqasr/checkpoint.hpp"
#include "vqasr/decode.hpp"
#include "vqasr/feature_file.hpp"
#include "vqasr/prosody.hpp"
#include "vqasr/scoring.hpp"
#include "vqasr/spectral.hpp"

namespace vqasr {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Self-contained Fisher-Yates so shuffles do not depend on the standard
// library's std::shuffle implementation.
template <typename T>
void deterministic_shuffle(std::vector<T>& values, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(values[i - 1], values[j]);
  }
}

Tensor to_tensor(const FeatureMatrix& features) {
  Tensor t({features.rows, features.cols});
  std::copy(features.data.begin(), features.data.end(), t.data());
  return t;
}

}  // namespace

FeatureMatrix compute_utterance_features(const AudioBuffer& buf,
                                         const ExperimentConfig& config,
                                         const std::string& utterance_id) {
  FrameSpec frame;
  MelConfig mel_cfg;
  mel_cfg.n_mels = config.n_mels;
  FeatureMatrix features = mel_spectrogram(buf, frame, mel_cfg);

  if (config.features == FeatureSet::fb_rand) {
    const std::uint64_t utt_seed =
        splitmix64(config.rand_seed ^ fnv1a(utterance_id));
    features.append_columns(random_features(features.rows, 3, utt_seed));
  } else if (feature_set_m(config.features) > 0) {
    PitchConfig pitch_cfg;
    features.append_columns(extract_prosody(
        buf, frame, pitch_cfg, feature_set_prosody(config.features)));
  }
  return cmvn(features);
}

std::vector<UtteranceData> load_dataset(const ExperimentConfig& config,
                                        const std::string& manifest_path,
                                        std::size_t* n_failed) {
  const std::vector<ManifestEntry> manifest = read_manifest(manifest_path);
  const bool use_precomputed =
      config.feature_mode == FeatureMode::precomputed ||
      (config.feature_mode == FeatureMode::automatic &&
       !config.features_dir.empty());

  std::map<std::string, std::string> index;
  if (use_precomputed) {
    if (config.features_dir.empty())
      throw ConfigError("feature_mode=precomputed requires features_dir");
    const std::string index_path =
        (fs::path(config.features_dir) / "index.tsv").string();
    std::ifstream in(index_path);
    if (!in) throw NotFoundError("cannot open feature index: " + index_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw DataError("malformed feature index line: " + line);
      std::string id = line.substr(0, tab);
      fs::path p(line.substr(tab + 1));
      if (!p.is_absolute()) p = fs::path(config.features_dir) / p;
      index[std::move(id)] = p.string();
    }
  }

  const Vocab vocab;
  std::vector<UtteranceData> dataset;
  std::size_t failed = 0;
  for (const ManifestEntry& entry : manifest) {
    try {
      UtteranceData utt;
      utt.id = entry.id;
      utt.transcript = entry.transcript;
      utt.target_ids = vocab.encode(entry.transcript);
      if (utt.target_ids.empty())
        throw DataError("transcript has no encodable characters");
      if (use_precomputed) {
        auto it = index.find(entry.id);
        if (it == index.end())
          throw DataError("utterance missing from feature index");
        utt.features = read_feature_file(it->second);
      } else {
        const AudioBuffer buf = read_wav(entry.audio_path);
        utt.features = compute_utterance_features(buf, config, entry.id);
      }
      const int expected =
          config.n_mels + feature_set_m(config.features);
      if (utt.features.cols != static_cast<std::size_t>(expected))
        throw DataError("feature file has " +
                        std::to_string(utt.features.cols) +
                        " channels, config expects " +
                        std::to_string(expected));
      dataset.push_back(std::move(utt));
    } catch (const Error& e) {
      ++failed;
      std::cerr << "[data] skipping utterance '" << entry.id
                << "': " << e.what() << "\n";
    }
  }
  if (n_failed) *n_failed = failed;
  return dataset;
}

std::vector<std::vector<std::size_t>> pack_batches(
    const std::vector<UtteranceData>& dataset, int batch_frames) {
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dataset[a].features.rows != dataset[b].features.rows)
      return dataset[a].features.rows > dataset[b].features.rows;
    return dataset[a].id < dataset[b].id;
  });

  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::size_t batch_max_len = 0;
  for (std::size_t idx : order) {
    const std::size_t len = dataset[idx].features.rows;
    const std::size_t next_max = std::max(batch_max_len, len);
    if (!current.empty() &&
        next_max * (current.size() + 1) >
            static_cast<std::size_t>(batch_frames)) {
      batches.push_back(std::move(current));
      current.clear();
      batch_max_len = 0;
    }
    current.push_back(idx);
    batch_max_len = std::max(batch_max_len, len);
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

EvalResult evaluate_greedy(const ModelParams& model,
                           const std::vector<UtteranceData>& dataset,
                           int threads) {
  const Vocab vocab;
  EvalResult result;
  result.hypotheses.resize(dataset.size());
  std::vector<double> losses(dataset.size(), 0.0);
  std::vector<std::size_t> tokens(dataset.size(), 0);
  std::vector<WERReport> reports(dataset.size());

#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::size_t u = 0; u < dataset.size(); ++u) {
    const Tensor features = to_tensor(dataset[u].features);
    std::vector<int> dec_input{Vocab::bos_id};
    dec_input.insert(dec_input.end(), dataset[u].target_ids.begin(),
                     dataset[u].target_ids.end());
    std::vector<int> ce_targets = dataset[u].target_ids;
    ce_targets.push_back(Vocab::eos_id);
    const Tensor logits = model_forward_utterance(
        model, features, dec_input, /*train=*/false, nullptr, nullptr);
    const CeResult ce = label_smoothed_ce_sum(
        logits, ce_targets, model.cfg.label_smoothing, Vocab::pad_id);
    losses[u] = ce.loss;
    tokens[u] = ce.n_tokens;

    const std::vector<int> hyp_ids = greedy_decode(features, model);
    result.hypotheses[u] = vocab.decode(hyp_ids);
    reports[u] =
        align_and_score_text(dataset[u].transcript, result.hypotheses[u]);
  }

  double loss_sum = 0.0;
  std::size_t token_sum = 0, edits = 0, ref_words = 0;
  for (std::size_t u = 0; u < dataset.size(); ++u) {
    loss_sum += losses[u];
    token_sum += tokens[u];
    edits += reports[u].edits();
    ref_words += reports[u].n_ref_words;
  }
  result.loss = token_sum ? loss_sum / static_cast<double>(token_sum) : 0.0;
  result.wer = ref_words
                   ? 100.0 * static_cast<double>(edits) /
                         static_cast<double>(ref_words)
                   : 0.0;
  return result;
}

std::vector<std::string> list_checkpoints(const std::string& dir) {
  std::vector<std::pair<long long, std::string>> found;
  if (!fs::is_directory(dir)) return {};
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("ckpt_", 0) != 0 || entry.path().extension() != ".bin")
      continue;
    try {
      const long long step = std::stoll(name.substr(5));
      found.emplace_back(step, entry.path().string());
    } catch (const std::exception&) {
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> paths;
  paths.reserve(found.size());
  for (auto& [step, path] : found) paths.push_back(std::move(path));
  return paths;
}

namespace {

struct TrainState {
  ModelParams model;
  ModelParams grads;
  std::vector<ModelParams> chunk_grads;
  std::vector<ParamRef> params;
  AdamOptimizer adam;

  TrainState(const ModelConfig& cfg, int n_chunks, OptimizerConfig opt_cfg)
      : model(make_model(cfg)), grads(make_gradient_buffer(cfg)), adam(opt_cfg) {
    chunk_grads.reserve(static_cast<std::size_t>(n_chunks));
    for (int i = 0; i < n_chunks; ++i)
      chunk_grads.push_back(make_gradient_buffer(cfg));
    params = collect_params(model, &grads);
    adam.init(params);
  }
};

// One update over a batch. Per-utterance work is parallelized over a
// fixed number of chunks with per-chunk gradient buffers reduced in
// chunk order, so results do not depend on the thread count.
double train_step(TrainState& state, const std::vector<UtteranceData>& dataset,
                  const std::vector<std::size_t>& batch, std::int64_t step,
                  const ExperimentConfig& config) {
  const std::size_t n = batch.size();
  const std::size_t n_chunks = std::min(state.chunk_grads.size(), n);

  std::size_t total_tokens = 0;
  for (std::size_t i = 0; i < n; ++i)
    total_tokens += dataset[batch[i]].target_ids.size() + 1;  // + eos

  std::vector<double> loss_sums(n, 0.0);
  const double inv_tokens = 1.0 / static_cast<double>(total_tokens);

#pragma omp parallel for schedule(static) num_threads(config.threads)
  for (std::size_t chunk = 0; chunk < n_chunks; ++chunk) {
    ModelParams& cgrads = state.chunk_grads[chunk];
    // contiguous ranges keep the within-chunk accumulation order fixed
    const std::size_t lo = chunk * n / n_chunks;
    const std::size_t hi = (chunk + 1) * n / n_chunks;
    for (std::size_t i = lo; i < hi; ++i) {
      const UtteranceData& utt = dataset[batch[i]];
      std::mt19937_64 rng(splitmix64(config.seed ^
                                     splitmix64(static_cast<std::uint64_t>(step)) ^
                                     fnv1a(utt.id)));
      const Tensor features = to_tensor(utt.features);
      std::vector<int> dec_input{Vocab::bos_id};
      dec_input.insert(dec_input.end(), utt.target_ids.begin(),
                       utt.target_ids.end());
      std::vector<int> ce_targets = utt.target_ids;
      ce_targets.push_back(Vocab::eos_id);

      UtteranceCache cache;
      const Tensor logits = model_forward_utterance(
          state.model, features, dec_input, /*train=*/true, &rng, &cache);
      CeResult ce = label_smoothed_ce_sum(
          logits, ce_targets, config.label_smoothing, Vocab::pad_id);
      loss_sums[i] = ce.loss;
      scale_inplace(ce.dlogits, inv_tokens);
      model_backward_utterance(state.model, cache, ce.dlogits, cgrads);
    }
  }

  // Fixed-order reductions.
  double loss = 0.0;
  for (double v : loss_sums) loss += v;
  loss *= inv_tokens;
  for (std::size_t chunk = 0; chunk < n_chunks; ++chunk) {
    ModelParams& cgrads = state.chunk_grads[chunk];
    std::size_t i = 0;
    std::vector<Tensor*> sources;
    for_each_tensor(cgrads,
                    [&](const std::string&, Tensor& t) { sources.push_back(&t); });
    for_each_tensor(state.grads, [&](const std::string&, Tensor& t) {
      add_inplace(t, *sources[i]);
      sources[i]->zero();
      ++i;
    });
  }

  if (!std::isfinite(loss))
    throw NonFiniteLossError("non-finite training loss at step " +
                             std::to_string(step));

  state.adam.step(state.params);
  for_each_tensor(state.grads, [](const std::string&, Tensor& t) { t.zero(); });
  return loss;
}

}  // namespace

TrainResult train(const ExperimentConfig& config) {
  config.validate();
  if (config.train_manifest.empty())
    throw ConfigError("train requires train_manifest");

  const fs::path out_dir(config.out_dir);
  const fs::path ckpt_dir = out_dir / "checkpoints";
  fs::create_directories(ckpt_dir);

  std::vector<UtteranceData> dataset =
      load_dataset(config, config.train_manifest);
  if (dataset.empty()) throw DataError("training set is empty");
  std::vector<UtteranceData> dev;
  if (!config.dev_manifest.empty())
    dev = load_dataset(config, config.dev_manifest);

  const ModelConfig model_cfg = config.model_config();
  OptimizerConfig opt_cfg;
  opt_cfg.lr_peak = config.lr_peak;
  opt_cfg.warmup_steps = config.warmup_steps;
  opt_cfg.clip = config.clip_norm;
  opt_cfg.clip_mode = config.clip_mode;

  constexpr int kGradChunks = 4;
  TrainState state(model_cfg, kGradChunks, opt_cfg);
  init_model(state.model, config.seed);

  // Resume from the newest checkpoint when present.
  std::int64_t start_step = 0;
  {
    const std::vector<std::string> existing =
        list_checkpoints(ckpt_dir.string());
    if (!existing.empty()) {
      const std::string& latest = existing.back();
      load_checkpoint(latest, state.params);
      const std::string name = fs::path(latest).filename().string();
      start_step = std::stoll(name.substr(5));
      state.adam.set_step_count(start_step);
      std::cerr << "[train] resuming from " << latest << " at step "
                << start_step << "\n";
    }
  }

  const std::vector<std::vector<std::size_t>> batches =
      pack_batches(dataset, config.batch_frames);

  TrainResult result;
  result.log_path = (out_dir / "train_log.csv").string();
  std::ofstream log(result.log_path,
                    start_step > 0 ? std::ios::app : std::ios::out);
  if (!log) throw DataError("cannot write training log: " + result.log_path);
  if (start_step == 0) log << "step,lr,train_loss,dev_loss,dev_wer\n";

  auto save_ckpt = [&](std::int64_t step) {
    std::ostringstream name;
    name << "ckpt_" << step << ".bin";
    const std::string path = (ckpt_dir / name.str()).string();
    save_checkpoint(path, state.params);
    result.checkpoint_paths.push_back(path);
  };

  std::int64_t step = start_step;
  bool stop = false;
  for (std::int64_t epoch = 0; !stop && step < config.max_updates; ++epoch) {
    std::vector<std::size_t> order(batches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    deterministic_shuffle(
        order, splitmix64(config.seed ^
                          splitmix64(static_cast<std::uint64_t>(epoch) +
                                     0x5851f42d4c957f2dULL)));
    for (std::size_t bi = 0; bi < order.size() && !stop; ++bi) {
      // On resume, earlier steps are skipped to keep the data order
      // aligned with the step counter.
      const std::int64_t global_index =
          epoch * static_cast<std::int64_t>(batches.size()) +
          static_cast<std::int64_t>(bi);
      if (global_index < start_step) continue;
      ++step;

      const double loss =
          train_step(state, dataset, batches[order[bi]], step, config);
      result.step_losses.push_back(loss);

      std::string dev_loss_str, dev_wer_str;
      const bool interval_hit = step % config.checkpoint_interval == 0 ||
                                step >= config.max_updates;
      if (interval_hit) {
        save_ckpt(step);
        if (!dev.empty()) {
          const EvalResult dev_eval =
              evaluate_greedy(state.model, dev, config.threads);
          dev_loss_str = std::to_string(dev_eval.loss);
          dev_wer_str = std::to_string(dev_eval.wer);
        }
        if (config.stop_train_wer >= 0.0) {
          const EvalResult train_eval =
              evaluate_greedy(state.model, dataset, config.threads);
          result.final_train_wer = train_eval.wer;
          std::cerr << "[train] step " << step << " train WER "
                    << train_eval.wer << "%\n";
          if (train_eval.wer <= config.stop_train_wer) stop = true;
        }
      }
      log << step << ',' << state.adam.last_lr() << ',' << loss << ','
          << dev_loss_str << ',' << dev_wer_str << '\n';
      if (step >= config.max_updates) stop = true;
    }
  }
  log.flush();
  result.final_step = step;
  return result;
}

}  // namespace vqasr
