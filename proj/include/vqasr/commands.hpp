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

#include "vqasr/config.hpp"
#include "vqasr/scoring.hpp"
#include "vqasr/train.hpp"

namespace vqasr {

struct ExtractResult {
  std::size_t n_written = 0;
  std::size_t n_failed = 0;
  std::string index_path;
};

// Extracts features for every utterance of a manifest into
// <out_dir>/<id>.vqfb plus an index.tsv. Per-utterance failures are
// logged and skipped. Throws DataError when the manifest is empty or
// more than 10% of utterances fail.
ExtractResult cmd_extract(const ExperimentConfig& config,
                          const std::string& manifest_path,
                          const std::string& out_dir);

struct DecodeScoreResult {
  std::vector<std::string> ids;
  std::vector<std::string> hypotheses;
  std::vector<WERReport> reports;
  ErrorDistribution aggregate;
  double wer = 0.0;  // corpus-level
  std::size_t n_checkpoints_averaged = 0;
  std::string hyp_path, score_path, aggregate_path;
};

// Averages the last min(avg_checkpoints, available) checkpoints from
// <out_dir>/checkpoints, beam-decodes the test manifest and writes
// hyps.tsv / scores.csv / aggregate.csv next to them.
DecodeScoreResult cmd_decode_score(const ExperimentConfig& config,
                                   const std::string& group_label = "test");

struct SweepResult {
  std::vector<std::uint64_t> seeds;
  std::vector<double> wers;
  double mean_wer = 0.0;
  double stderr_wer = 0.0;
  std::vector<DecodeScoreResult> runs;
};

// Trains and decodes once per seed (out_dir/seed_<s>/), reporting the
// mean WER and the standard deviation of the mean.
SweepResult seed_sweep(const ExperimentConfig& base,
                       const std::vector<std::uint64_t>& seeds);

struct CompareResult {
  SweepResult a, b;
  std::string label_a, label_b;
  double relative_reduction_pct = 0.0;
  double p_value = 1.0;
  ErrorDistribution errors_a, errors_b;
  std::string seeds_csv, summary_csv, errors_csv;
};

// The comparative experiment: sweeps both configurations over the same
// seeds, reports mean +/- stderr, relative WER reduction, the Welch
// p-value and the pooled S/D/I distribution per configuration.
CompareResult cmd_compare(const ExperimentConfig& config_a,
                          const ExperimentConfig& config_b,
                          const std::vector<std::uint64_t>& seeds,
                          const std::string& report_dir);

}  // namespace vqasr
