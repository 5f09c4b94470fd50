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

#include <cstddef>
#include <string>
#include <vector>

#include "vqasr/errors.hpp"

namespace vqasr {

struct WERReport {
  std::size_t n_ref_words = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t edits() const { return substitutions + deletions + insertions; }
  double wer() const {
    return 100.0 * static_cast<double>(edits()) /
           static_cast<double>(n_ref_words);
  }
};

// Lowercases, splits on whitespace, strips leading/trailing punctuation
// (apostrophes are kept, they are part of contractions).
std::vector<std::string> tokenize_words(const std::string& text);

// Word-level Levenshtein alignment with unit costs. Among minimum-cost
// alignments, substitutions are preferred over insertion+deletion pairs.
// Throws EmptyReferenceError when the reference has no words.
WERReport align_and_score(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp);
WERReport align_and_score_text(const std::string& ref, const std::string& hyp);

// Pooled error counts over a group of utterances.
struct ErrorDistribution {
  std::string group;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t n_ref_words = 0;
  double s_share = 0.0;  // S / (S+D+I); 0 with degenerate=true when no errors
  double d_share = 0.0;
  double i_share = 0.0;
  double wer = 0.0;
  bool degenerate = false;
};

ErrorDistribution error_distribution(const std::vector<WERReport>& reports,
                                     const std::string& group);

}  // namespace vqasr
