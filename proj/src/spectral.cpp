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

#include "vqasr/spectral.hpp"

#include <cmath>
#include <numbers>

namespace vqasr {

void fft_radix2(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ShapeMismatchError("fft size must be a power of two, got " +
                             std::to_string(n));
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

namespace {

void validate_mel_config(const MelConfig& cfg, int sample_rate) {
  if (cfg.n_mels < 1) throw ConfigError("n_mels must be >= 1");
  if (cfg.n_fft < 2 || (cfg.n_fft & (cfg.n_fft - 1)) != 0)
    throw ConfigError("n_fft must be a power of two >= 2");
  if (!(cfg.f_min < cfg.f_max) || cfg.f_max > sample_rate / 2.0)
    throw ConfigError("need f_min < f_max <= sample_rate/2");
}

}  // namespace

std::vector<double> mel_filter_centers(const MelConfig& cfg) {
  const double mel_lo = hz_to_mel(cfg.f_min);
  const double mel_hi = hz_to_mel(cfg.f_max);
  std::vector<double> centers(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double mel = mel_lo + (mel_hi - mel_lo) * (m + 1) / (cfg.n_mels + 1);
    centers[m] = mel_to_hz(mel);
  }
  return centers;
}

FeatureMatrix mel_filterbank_matrix(const MelConfig& cfg, int sample_rate) {
  validate_mel_config(cfg, sample_rate);
  const int n_bins = cfg.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.f_min);
  const double mel_hi = hz_to_mel(cfg.f_max);

  // n_mels + 2 boundary points, equally spaced in mel.
  std::vector<double> mel_points(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    mel_points[i] = mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1);

  FeatureMatrix fb(static_cast<std::size_t>(cfg.n_mels),
                   static_cast<std::size_t>(n_bins));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = mel_points[m];
    const double center = mel_points[m + 1];
    const double right = mel_points[m + 2];
    double total = 0.0;
    for (int k = 0; k < n_bins; ++k) {
      const double mel_k =
          hz_to_mel(static_cast<double>(k) * sample_rate / cfg.n_fft);
      double w = 0.0;
      if (mel_k > left && mel_k < right) {
        w = mel_k <= center ? (mel_k - left) / (center - left)
                            : (right - mel_k) / (right - center);
      }
      fb.at(static_cast<std::size_t>(m), static_cast<std::size_t>(k)) = w;
      total += w;
    }
    if (total <= 0.0)
      throw DegenerateFilterError(
          "mel filter " + std::to_string(m) +
          " spans no FFT bin; reduce n_mels or raise n_fft");
  }
  return fb;
}

FeatureMatrix mel_spectrogram(const AudioBuffer& buf, const FrameSpec& frame,
                              const MelConfig& cfg) {
  validate_mel_config(cfg, buf.sample_rate);
  const auto frames = frame_signal(buf, frame);  // propagates EmptySignal
  const FeatureMatrix fb = mel_filterbank_matrix(cfg, buf.sample_rate);
  const int n_bins = cfg.n_fft / 2 + 1;
  const int win = frame.window_samples(buf.sample_rate);
  if (win > cfg.n_fft)
    throw ConfigError("analysis window (" + std::to_string(win) +
                      " samples) exceeds n_fft");

  // Periodic Hann taper.
  std::vector<double> window(static_cast<std::size_t>(win));
  for (int i = 0; i < win; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);

  FeatureMatrix out(frames.size(), static_cast<std::size_t>(cfg.n_mels));
  out.labels.resize(static_cast<std::size_t>(cfg.n_mels));
  for (int m = 0; m < cfg.n_mels; ++m) {
    char label[8];
    std::snprintf(label, sizeof(label), "fb%02d", m);
    out.labels[static_cast<std::size_t>(m)] = label;
  }

  std::vector<std::complex<double>> spec(static_cast<std::size_t>(cfg.n_fft));
  std::vector<double> power(static_cast<std::size_t>(n_bins));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
    for (int i = 0; i < win; ++i) spec[i] = frames[t][i] * window[i];
    fft_radix2(spec);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      for (int k = 0; k < n_bins; ++k)
        acc += fb.at(static_cast<std::size_t>(m), static_cast<std::size_t>(k)) *
               power[k];
      out.at(t, static_cast<std::size_t>(m)) = std::log(cfg.log_floor + acc);
    }
  }
  return out;
}

}  // namespace vqasr
