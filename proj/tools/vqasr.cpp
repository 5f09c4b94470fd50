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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "vqasr/commands.hpp"
#include "vqasr/config.hpp"
#include "vqasr/scoring.hpp"
#include "vqasr/stats.hpp"
#include "vqasr/train.hpp"

namespace {

using vqasr::ExperimentConfig;

// --set key=value overrides applied after the config file.
std::map<std::string, std::string> parse_overrides(
    const std::vector<std::string>& sets) {
  std::map<std::string, std::string> kv;
  for (const std::string& s : sets) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw vqasr::ConfigError("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return kv;
}

ExperimentConfig build_config(const std::string& config_path,
                              const std::vector<std::string>& sets) {
  ExperimentConfig config;
  if (!config_path.empty())
    vqasr::apply_config(config, vqasr::parse_config_file(config_path));
  vqasr::apply_config(config, parse_overrides(sets));
  config.validate();
  return config;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw vqasr::ConfigError("empty seed list");
  return seeds;
}

int run_extract(const std::string& config_path,
                const std::vector<std::string>& sets,
                const std::string& manifest, const std::string& out_dir) {
  ExperimentConfig config = build_config(config_path, sets);
  const std::string src = manifest.empty() ? config.train_manifest : manifest;
  if (src.empty())
    throw vqasr::ConfigError("extract needs --manifest or train_manifest");
  const vqasr::ExtractResult res = vqasr::cmd_extract(config, src, out_dir);
  std::cout << "wrote " << res.n_written << " feature files ("
            << res.n_failed << " failed), index at " << res.index_path
            << "\n";
  return 0;
}

int run_train(const std::string& config_path,
              const std::vector<std::string>& sets) {
  ExperimentConfig config = build_config(config_path, sets);
  const vqasr::TrainResult res = vqasr::train(config);
  std::cout << "trained to step " << res.final_step << ", "
            << res.checkpoint_paths.size() << " checkpoints, log at "
            << res.log_path << "\n";
  return 0;
}

int run_decode(const std::string& config_path,
               const std::vector<std::string>& sets) {
  ExperimentConfig config = build_config(config_path, sets);
  const vqasr::DecodeScoreResult res = vqasr::cmd_decode_score(config);
  std::cout << "averaged " << res.n_checkpoints_averaged
            << " checkpoints; WER " << res.wer << "% over "
            << res.reports.size() << " utterances\n"
            << "hypotheses: " << res.hyp_path << "\n"
            << "scores:     " << res.score_path << "\n"
            << "aggregate:  " << res.aggregate_path << "\n";
  return 0;
}

int run_score(const std::string& manifest_path, const std::string& hyp_path,
              const std::string& out_path) {
  const auto manifest = vqasr::read_manifest(manifest_path);
  std::map<std::string, std::string> hyps;
  std::ifstream in(hyp_path);
  if (!in) throw vqasr::NotFoundError("cannot open hypotheses: " + hyp_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    hyps[line.substr(0, tab)] =
        tab == std::string::npos ? "" : line.substr(tab + 1);
  }

  std::vector<vqasr::WERReport> reports;
  std::ofstream out(out_path);
  if (!out) throw vqasr::DataError("cannot write scores: " + out_path);
  out << "id,n_ref,S,D,I,wer\n";
  for (const auto& entry : manifest) {
    const auto it = hyps.find(entry.id);
    const std::string hyp = it == hyps.end() ? "" : it->second;
    const vqasr::WERReport r =
        vqasr::align_and_score_text(entry.transcript, hyp);
    reports.push_back(r);
    out << entry.id << ',' << r.n_ref_words << ',' << r.substitutions << ','
        << r.deletions << ',' << r.insertions << ',' << r.wer() << '\n';
  }
  const vqasr::ErrorDistribution agg =
      vqasr::error_distribution(reports, "scored");
  std::cout << "WER " << agg.wer << "% (S=" << agg.substitutions
            << " D=" << agg.deletions << " I=" << agg.insertions << ") over "
            << reports.size() << " utterances; report at " << out_path << "\n";
  return 0;
}

int run_sweep(const std::string& config_path,
              const std::vector<std::string>& sets, const std::string& seeds) {
  ExperimentConfig config = build_config(config_path, sets);
  const vqasr::SweepResult res =
      vqasr::seed_sweep(config, parse_seed_list(seeds));
  std::cout << "seed,wer\n";
  for (std::size_t i = 0; i < res.seeds.size(); ++i)
    std::cout << res.seeds[i] << ',' << res.wers[i] << '\n';
  std::cout << "mean " << res.mean_wer << " +/- " << res.stderr_wer
            << " (stderr over " << res.seeds.size() << " seeds)\n";
  return 0;
}

int run_compare(const std::string& config_a, const std::string& config_b,
                const std::vector<std::string>& sets_a,
                const std::vector<std::string>& sets_b,
                const std::string& seeds, const std::string& report_dir) {
  const ExperimentConfig a = build_config(config_a, sets_a);
  const ExperimentConfig b = build_config(config_b, sets_b);
  const vqasr::CompareResult res =
      vqasr::cmd_compare(a, b, parse_seed_list(seeds), report_dir);
  std::cout << "A (" << res.label_a << "): " << res.a.mean_wer << " +/- "
            << res.a.stderr_wer << "\n"
            << "B (" << res.label_b << "): " << res.b.mean_wer << " +/- "
            << res.b.stderr_wer << "\n"
            << "relative WER reduction: " << res.relative_reduction_pct
            << "%\n"
            << "two-tailed p-value:     " << res.p_value << "\n"
            << "reports under " << report_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voice-quality-augmented speech recognition pipeline"};
  app.require_subcommand(1);

  std::string config_path, config_path_b, manifest, out_dir, hyp_path;
  std::string seeds = "1,2";
  std::vector<std::string> sets, sets_b;

  auto* extract = app.add_subcommand("extract", "precompute feature files");
  extract->add_option("--config", config_path, "experiment config file");
  extract->add_option("--set", sets, "override key=value");
  extract->add_option("--manifest", manifest, "input manifest TSV");
  extract->add_option("--out", out_dir, "output feature directory")
      ->required();

  auto* tr = app.add_subcommand("train", "train an acoustic model");
  tr->add_option("--config", config_path, "experiment config file");
  tr->add_option("--set", sets, "override key=value");

  auto* dec = app.add_subcommand(
      "decode", "average checkpoints, beam-decode and score the test set");
  dec->add_option("--config", config_path, "experiment config file");
  dec->add_option("--set", sets, "override key=value");

  auto* sc = app.add_subcommand("score", "score a hypothesis file");
  sc->add_option("--manifest", manifest, "reference manifest TSV")->required();
  sc->add_option("--hyps", hyp_path, "hypothesis TSV (id<TAB>text)")
      ->required();
  sc->add_option("--out", out_dir, "output CSV path")->required();

  auto* sw = app.add_subcommand("sweep", "train/decode across seeds");
  sw->add_option("--config", config_path, "experiment config file");
  sw->add_option("--set", sets, "override key=value");
  sw->add_option("--seeds", seeds, "comma-separated seed list");

  auto* cmp = app.add_subcommand("compare", "A/B experiment across seeds");
  cmp->add_option("--config-a", config_path, "config A")->required();
  cmp->add_option("--config-b", config_path_b, "config B")->required();
  cmp->add_option("--set-a", sets, "override for A (key=value)");
  cmp->add_option("--set-b", sets_b, "override for B (key=value)");
  cmp->add_option("--seeds", seeds, "comma-separated seed list");
  cmp->add_option("--out", out_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed())
      return run_extract(config_path, sets, manifest, out_dir);
    if (tr->parsed()) return run_train(config_path, sets);
    if (dec->parsed()) return run_decode(config_path, sets);
    if (sc->parsed()) return run_score(manifest, hyp_path, out_dir);
    if (sw->parsed()) return run_sweep(config_path, sets, seeds);
    if (cmp->parsed())
      return run_compare(config_path, config_path_b, sets, sets_b, seeds,
                         out_dir);
  } catch (const vqasr::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const vqasr::NonFiniteLossError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const vqasr::NonFiniteGradientError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const vqasr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
