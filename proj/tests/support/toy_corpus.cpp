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

#include "support/toy_corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace vqasr::testing {

AudioBuffer make_sine(double freq_hz, double seconds, int sample_rate,
                      double amplitude) {
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  const std::size_t n = static_cast<std::size_t>(seconds * sample_rate);
  buf.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    buf.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz *
                                          static_cast<double>(i) / sample_rate);
  return buf;
}

AudioBuffer make_white_noise(double seconds, std::uint64_t seed,
                             int sample_rate, double amplitude) {
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  const std::size_t n = static_cast<std::size_t>(seconds * sample_rate);
  buf.samples.resize(n);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    buf.samples[i] = amplitude * (2.0 * u - 1.0);
  }
  return buf;
}

AudioBuffer make_pulse_train(int base_period_samples, double seconds,
                             int period_delta_samples, double amplitude_delta,
                             int sample_rate, double amplitude) {
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  const std::size_t n = static_cast<std::size_t>(seconds * sample_rate);
  buf.samples.assign(n, 0.0);
  std::size_t pos = 0;
  int cycle = 0;
  while (pos < n) {
    const double a =
        amplitude * (1.0 + (cycle % 2 == 0 ? 1.0 : -1.0) * amplitude_delta);
    buf.samples[pos] = a;
    const int period = base_period_samples +
                       (cycle % 2 == 0 ? period_delta_samples
                                       : -period_delta_samples);
    pos += static_cast<std::size_t>(period);
    ++cycle;
  }
  return buf;
}

namespace {

// One tone per character, geometrically spaced so neighbouring letters
// land in distinct mel channels.
double char_tone_hz(char c) {
  if (c == ' ') return 0.0;  // rendered as silence
  if (c == '\'') return 180.0;
  const int idx = c - 'a';
  return 240.0 * std::pow(2.0, static_cast<double>(idx) / 7.0);
}

}  // namespace

AudioBuffer render_transcript(const std::string& transcript, int sample_rate,
                              double char_seconds) {
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  const std::size_t per_char =
      static_cast<std::size_t>(char_seconds * sample_rate);
  buf.samples.reserve((transcript.size() + 2) * per_char);

  auto append_tone = [&](double freq, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      if (freq <= 0.0) {
        buf.samples.push_back(0.0);
        continue;
      }
      const double t = static_cast<double>(i) / sample_rate;
      // mild amplitude modulation keeps frames from being identical
      const double env =
          0.45 * (1.0 + 0.2 * std::sin(2.0 * std::numbers::pi * 5.0 * t));
      buf.samples.push_back(env *
                            std::sin(2.0 * std::numbers::pi * freq * t));
    }
  };

  append_tone(0.0, per_char / 2);  // leading silence
  for (char c : transcript) append_tone(char_tone_hz(c), per_char);
  append_tone(0.0, per_char / 2);
  return buf;
}

ToyCorpus make_toy_corpus(const std::string& dir, std::size_t n_utterances,
                          std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  static const std::vector<std::string> kWords = {
      "red", "big",  "wet", "old", "cat", "dog", "fox", "owl",
      "sun", "sky",  "ice", "elm", "ran", "sat", "dug", "hid",
      "ate", "saw",  "met", "won", "joy", "mud", "hay", "fog"};

  std::mt19937_64 rng(seed);
  ToyCorpus corpus;
  corpus.manifest_path = (fs::path(dir) / "manifest.tsv").string();
  std::ofstream manifest(corpus.manifest_path);

  std::vector<std::string> used;
  for (std::size_t u = 0; u < n_utterances; ++u) {
    std::string transcript;
    do {
      const std::size_t n_words = 2 + rng() % 2;
      transcript.clear();
      for (std::size_t w = 0; w < n_words; ++w) {
        if (w) transcript += ' ';
        transcript += kWords[rng() % kWords.size()];
      }
    } while (std::find(used.begin(), used.end(), transcript) != used.end());
    used.push_back(transcript);

    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "utt%03zu", u);
    const std::string id = idbuf;
    const std::string wav_name = id + ".wav";
    write_wav((fs::path(dir) / wav_name).string(),
              render_transcript(transcript));
    manifest << id << '\t' << wav_name << '\t' << transcript << '\n';
    corpus.ids.push_back(id);
    corpus.transcripts.push_back(transcript);
  }
  manifest.flush();
  return corpus;
}

}  // namespace vqasr::testing
