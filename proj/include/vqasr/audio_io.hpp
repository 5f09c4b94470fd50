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
#include <span>
#include <string>
#include <vector>

#include "vqasr/errors.hpp"

namespace vqasr {

// Mono PCM signal. Samples are normalized amplitudes in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 16000;
};

// Analysis framing: 25 ms windows every 10 ms by default.
struct FrameSpec {
  double window_length = 0.025;  // seconds
  double hop_length = 0.010;     // seconds

  int window_samples(int sample_rate) const {
    return static_cast<int>(window_length * sample_rate + 0.5);
  }
  int hop_samples(int sample_rate) const {
    return static_cast<int>(hop_length * sample_rate + 0.5);
  }

  // 1 + floor((T - window) / hop) complete windows; the final partial
  // window is dropped.
  std::size_t frame_count(std::size_t n_samples, int sample_rate) const {
    const std::size_t win = static_cast<std::size_t>(window_samples(sample_rate));
    const std::size_t hop = static_cast<std::size_t>(hop_samples(sample_rate));
    if (n_samples < win) return 0;
    return 1 + (n_samples - win) / hop;
  }
};

// Reads a 16-bit little-endian PCM mono WAV file. Samples are scaled by
// 1/32768 into [-1, 1). Rejects anything else.
AudioBuffer read_wav(const std::string& path);

// Writes a 16-bit PCM mono WAV file. Samples are clamped to [-1, 1] and
// quantized to 16 bits.
void write_wav(const std::string& path, const AudioBuffer& buf);

// Slices the signal into complete analysis windows. Frame i covers
// samples [i*hop, i*hop + window). Views into `buf`, no copies.
// Throws EmptySignalError when not even one window fits.
std::vector<std::span<const double>> frame_signal(const AudioBuffer& buf,
                                                  const FrameSpec& spec);

// One utterance of a data manifest.
struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::string transcript;
};

// Reads a TSV manifest: id<TAB>audio_path<TAB>transcript, one utterance
// per line, no header. Relative audio paths are resolved against the
// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace vqasr
