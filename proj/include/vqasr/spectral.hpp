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

#include <complex>
#include <vector>

#include "vqasr/audio_io.hpp"
#include "vqasr/feature_matrix.hpp"

namespace vqasr {

struct MelConfig {
  int n_mels = 40;
  int n_fft = 512;
  double f_min = 20.0;
  double f_max = 7600.0;
  // Floor added inside the log so silence stays finite.
  double log_floor = 1e-10;
};

// HTK mel scale.
inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}
inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// In-place radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& x);

// Triangular filters equally spaced on the mel scale, peak weight 1.
// Returned matrix is n_mels x (n_fft/2 + 1), row-major in a FeatureMatrix
// (rows = filters). Throws DegenerateFilterError when a filter covers no
// FFT bin with positive weight.
FeatureMatrix mel_filterbank_matrix(const MelConfig& cfg, int sample_rate);

// Center frequency (Hz) of each mel filter, for locating channels in tests.
std::vector<double> mel_filter_centers(const MelConfig& cfg);

// Log mel power spectrogram: entry (t, m) = log(floor + sum_k w(m,k) |X(t,k)|^2).
// Frames follow `frame`, Hann-windowed and zero-padded to n_fft.
// Channel labels are "fb00".."fbNN".
FeatureMatrix mel_spectrogram(const AudioBuffer& buf, const FrameSpec& frame,
                              const MelConfig& cfg);

}  // namespace vqasr
