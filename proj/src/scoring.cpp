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

#include "vqasr/scoring.hpp"

#include <algorithm>
#include <cctype>

namespace vqasr {

std::vector<std::string> tokenize_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&]() {
    // strip punctuation at both ends, keeping apostrophes
    std::size_t begin = 0, end = current.size();
    auto is_strippable = [](char c) {
      return std::ispunct(static_cast<unsigned char>(c)) && c != '\'';
    };
    while (begin < end && is_strippable(current[begin])) ++begin;
    while (end > begin && is_strippable(current[end - 1])) --end;
    if (end > begin) words.push_back(current.substr(begin, end - begin));
    current.clear();
  };
  for (char raw : text) {
    if (std::isspace(static_cast<unsigned char>(raw))) {
      flush();
    } else {
      current += static_cast<char>(
          std::tolower(static_cast<unsigned char>(raw)));
    }
  }
  flush();
  return words;
}

WERReport align_and_score(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp) {
  if (ref.empty())
    throw EmptyReferenceError("reference transcript has no words");
  const std::size_t n = ref.size(), m = hyp.size();

  // d[i][j] = edit distance between ref[0:i] and hyp[0:j]
  std::vector<std::vector<std::size_t>> d(n + 1,
                                          std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub =
          d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t del = d[i - 1][j] + 1;
      const std::size_t ins = d[i][j - 1] + 1;
      d[i][j] = std::min({sub, del, ins});
    }
  }

  // Backtrace with diagonal preference so ties count as substitutions
  // rather than insertion+deletion pairs.
  WERReport report;
  report.n_ref_words = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++report.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++report.deletions;
      --i;
    } else {
      ++report.insertions;
      --j;
    }
  }
  return report;
}

WERReport align_and_score_text(const std::string& ref, const std::string& hyp) {
  return align_and_score(tokenize_words(ref), tokenize_words(hyp));
}

ErrorDistribution error_distribution(const std::vector<WERReport>& reports,
                                     const std::string& group) {
  if (reports.empty())
    throw DataError("error_distribution needs at least one report");
  ErrorDistribution dist;
  dist.group = group;
  for (const WERReport& r : reports) {
    dist.substitutions += r.substitutions;
    dist.deletions += r.deletions;
    dist.insertions += r.insertions;
    dist.n_ref_words += r.n_ref_words;
  }
  const std::size_t total =
      dist.substitutions + dist.deletions + dist.insertions;
  if (total == 0) {
    dist.degenerate = true;
  } else {
    dist.s_share = 100.0 * static_cast<double>(dist.substitutions) / total;
    dist.d_share = 100.0 * static_cast<double>(dist.deletions) / total;
    dist.i_share = 100.0 * static_cast<double>(dist.insertions) / total;
  }
  dist.wer = dist.n_ref_words == 0
                 ? 0.0
                 : 100.0 * static_cast<double>(total) / dist.n_ref_words;
  return dist;
}

}  // namespace vqasr
