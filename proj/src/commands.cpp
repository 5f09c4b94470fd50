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

#include "vqasr/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "vqasr/checkpoint.hpp"
#include "vqasr/decode.hpp"
#include "vqasr/feature_file.hpp"
#include "vqasr/stats.hpp"

namespace vqasr {

namespace fs = std::filesystem;

ExtractResult cmd_extract(const ExperimentConfig& config,
                          const std::string& manifest_path,
                          const std::string& out_dir) {
  const std::vector<ManifestEntry> manifest = read_manifest(manifest_path);
  if (manifest.empty())
    throw DataError("manifest has no utterances: " + manifest_path);
  fs::create_directories(out_dir);

  ExtractResult result;
  std::vector<std::string> index_lines;
  for (const ManifestEntry& entry : manifest) {
    try {
      const AudioBuffer buf = read_wav(entry.audio_path);
      const FeatureMatrix features =
          compute_utterance_features(buf, config, entry.id);
      const std::string filename = entry.id + ".vqfb";
      write_feature_file((fs::path(out_dir) / filename).string(), features);
      index_lines.push_back(entry.id + "\t" + filename);
      ++result.n_written;
    } catch (const Error& e) {
      ++result.n_failed;
      std::cerr << "[extract] skipping utterance '" << entry.id
                << "': " << e.what() << "\n";
    }
  }

  result.index_path = (fs::path(out_dir) / "index.tsv").string();
  std::ofstream index(result.index_path);
  if (!index) throw DataError("cannot write index: " + result.index_path);
  for (const std::string& line : index_lines) index << line << "\n";
  index.flush();

  if (result.n_failed * 10 > manifest.size())
    throw DataError(std::to_string(result.n_failed) + " of " +
                    std::to_string(manifest.size()) +
                    " utterances failed extraction (over 10%)");
  return result;
}

DecodeScoreResult cmd_decode_score(const ExperimentConfig& config,
                                   const std::string& group_label) {
  if (config.test_manifest.empty())
    throw ConfigError("decode requires test_manifest");
  const fs::path out_dir(config.out_dir);
  const std::vector<std::string> all_ckpts =
      list_checkpoints((out_dir / "checkpoints").string());
  if (all_ckpts.empty())
    throw NoCheckpointsError("no checkpoints under " +
                             (out_dir / "checkpoints").string());

  const std::size_t want = static_cast<std::size_t>(config.avg_checkpoints);
  const std::size_t take = std::min(want, all_ckpts.size());
  if (take < want)
    std::cerr << "[decode] only " << take << " checkpoints available, "
              << "averaging " << take << " instead of " << want << "\n";
  const std::vector<std::string> tail(all_ckpts.end() - static_cast<long>(take),
                                      all_ckpts.end());

  ModelParams model = make_model(config.model_config());
  ModelParams grads_unused = make_model(config.model_config());
  std::vector<ParamRef> params = collect_params(model, &grads_unused);
  NamedTensors averaged = average_checkpoints(tail);
  if (averaged.size() != params.size())
    throw ManifestMismatchError("averaged checkpoint does not match model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (averaged[i].first != params[i].name ||
        !averaged[i].second.same_shape(*params[i].value))
      throw ManifestMismatchError("checkpoint parameter " + averaged[i].first +
                                  " does not match model manifest");
    *params[i].value = std::move(averaged[i].second);
  }

  std::vector<UtteranceData> dataset =
      load_dataset(config, config.test_manifest);
  if (dataset.empty()) throw DataError("test set is empty");

  DecodeScoreResult result;
  result.n_checkpoints_averaged = take;
  result.ids.resize(dataset.size());
  result.hypotheses.resize(dataset.size());
  result.reports.resize(dataset.size());

  const Vocab vocab;
#pragma omp parallel for schedule(static) num_threads(config.threads)
  for (std::size_t u = 0; u < dataset.size(); ++u) {
    Tensor features({dataset[u].features.rows, dataset[u].features.cols});
    std::copy(dataset[u].features.data.begin(), dataset[u].features.data.end(),
              features.data());
    const Hypothesis hyp = beam_search(features, model, config.beam, -1,
                                       config.length_normalize);
    std::vector<int> tokens = hyp.tokens;
    if (!tokens.empty() && tokens.back() == Vocab::eos_id) tokens.pop_back();
    result.ids[u] = dataset[u].id;
    result.hypotheses[u] = vocab.decode(tokens);
    result.reports[u] =
        align_and_score_text(dataset[u].transcript, result.hypotheses[u]);
  }

  result.aggregate = error_distribution(result.reports, group_label);
  result.wer = result.aggregate.wer;

  result.hyp_path = (out_dir / "hyps.tsv").string();
  std::ofstream hyp_file(result.hyp_path);
  for (std::size_t u = 0; u < dataset.size(); ++u)
    hyp_file << result.ids[u] << '\t' << result.hypotheses[u] << '\n';

  result.score_path = (out_dir / "scores.csv").string();
  std::ofstream score_file(result.score_path);
  score_file << "id,n_ref,S,D,I,wer\n";
  for (std::size_t u = 0; u < dataset.size(); ++u) {
    const WERReport& r = result.reports[u];
    score_file << result.ids[u] << ',' << r.n_ref_words << ','
               << r.substitutions << ',' << r.deletions << ',' << r.insertions
               << ',' << r.wer() << '\n';
  }

  result.aggregate_path = (out_dir / "aggregate.csv").string();
  std::ofstream agg_file(result.aggregate_path);
  agg_file << "group,S,D,I,S_share,D_share,I_share,wer\n";
  const ErrorDistribution& a = result.aggregate;
  agg_file << a.group << ',' << a.substitutions << ',' << a.deletions << ','
           << a.insertions << ',' << a.s_share << ',' << a.d_share << ','
           << a.i_share << ',' << a.wer << '\n';
  return result;
}

SweepResult seed_sweep(const ExperimentConfig& base,
                       const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw ConfigError("seed sweep needs at least 2 seeds");
  SweepResult result;
  result.seeds = seeds;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig config = base;
    config.seed = seed;
    config.out_dir =
        (fs::path(base.out_dir) / ("seed_" + std::to_string(seed))).string();
    train(config);
    DecodeScoreResult run = cmd_decode_score(config);
    result.wers.push_back(run.wer);
    result.runs.push_back(std::move(run));
  }
  result.mean_wer = mean(result.wers);
  result.stderr_wer = stderr_of_mean(result.wers);
  return result;
}

CompareResult cmd_compare(const ExperimentConfig& config_a,
                          const ExperimentConfig& config_b,
                          const std::vector<std::uint64_t>& seeds,
                          const std::string& report_dir) {
  if (config_a.test_manifest != config_b.test_manifest)
    throw ConfigError("compared configs must share the test manifest");
  fs::create_directories(report_dir);

  CompareResult result;
  result.label_a = feature_set_name(config_a.features) + "/" +
                   (config_a.variant == FrontEndVariant::vq ? "vq" : "plain");
  result.label_b = feature_set_name(config_b.features) + "/" +
                   (config_b.variant == FrontEndVariant::vq ? "vq" : "plain");

  ExperimentConfig a = config_a;
  a.out_dir = (fs::path(report_dir) / "config_a").string();
  ExperimentConfig b = config_b;
  b.out_dir = (fs::path(report_dir) / "config_b").string();
  result.a = seed_sweep(a, seeds);
  result.b = seed_sweep(b, seeds);

  result.relative_reduction_pct =
      relative_reduction(result.a.mean_wer, result.b.mean_wer);
  result.p_value = welch_p_value(result.a.wers, result.b.wers);

  std::vector<WERReport> pool_a, pool_b;
  for (const DecodeScoreResult& run : result.a.runs)
    pool_a.insert(pool_a.end(), run.reports.begin(), run.reports.end());
  for (const DecodeScoreResult& run : result.b.runs)
    pool_b.insert(pool_b.end(), run.reports.begin(), run.reports.end());
  result.errors_a = error_distribution(pool_a, result.label_a);
  result.errors_b = error_distribution(pool_b, result.label_b);

  result.seeds_csv = (fs::path(report_dir) / "compare_seeds.csv").string();
  {
    std::ofstream out(result.seeds_csv);
    out << "config,seed,wer\n";
    for (std::size_t i = 0; i < seeds.size(); ++i)
      out << "A," << seeds[i] << ',' << result.a.wers[i] << '\n';
    for (std::size_t i = 0; i < seeds.size(); ++i)
      out << "B," << seeds[i] << ',' << result.b.wers[i] << '\n';
  }

  result.summary_csv = (fs::path(report_dir) / "compare_summary.csv").string();
  {
    std::ofstream out(result.summary_csv);
    out << "config,label,mean_wer,stderr_wer\n";
    out << "A," << result.label_a << ',' << result.a.mean_wer << ','
        << result.a.stderr_wer << '\n';
    out << "B," << result.label_b << ',' << result.b.mean_wer << ','
        << result.b.stderr_wer << '\n';
    out << "relative_reduction_pct," << result.relative_reduction_pct
        << ",p_value," << result.p_value << '\n';
  }

  result.errors_csv = (fs::path(report_dir) / "compare_errors.csv").string();
  {
    std::ofstream out(result.errors_csv);
    out << "group,S,D,I,S_share,D_share,I_share,wer\n";
    for (const ErrorDistribution* d : {&result.errors_a, &result.errors_b}) {
      out << d->group << ',' << d->substitutions << ',' << d->deletions << ','
          << d->insertions << ',' << d->s_share << ',' << d->d_share << ','
          << d->i_share << ',' << d->wer << '\n';
    }
  }
  return result;
}

}  // namespace vqasr
