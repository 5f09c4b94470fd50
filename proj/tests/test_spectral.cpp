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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "support/toy_corpus.hpp"
#include "vqasr/spectral.hpp"

using namespace vqasr;
namespace vt = vqasr::testing;

TEST_CASE("fft matches the naive DFT") {
  std::mt19937_64 rng(3);
  std::vector<double> x(128);
  for (double& v : x) {
    const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    v = 2.0 * u - 1.0;
  }
  std::vector<std::complex<double>> fast(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) fast[i] = x[i];
  fft_radix2(fast);
  const auto slow = vt::naive_dft(x);
  for (std::size_t k = 0; k < x.size(); ++k)
    CHECK(std::abs(fast[k] - slow[k]) < 1e-9);
}

TEST_CASE("mel formula value") {
  // 2595 * log10(2)
  CHECK(hz_to_mel(700.0) == doctest::Approx(781.17).epsilon(1e-4));
  CHECK(mel_to_hz(hz_to_mel(1234.5)) == doctest::Approx(1234.5).epsilon(1e-9));
}

TEST_CASE("filterbank shape and degenerate configs") {
  MelConfig cfg;
  const FeatureMatrix fb = mel_filterbank_matrix(cfg, 16000);
  CHECK(fb.rows == 40);
  CHECK(fb.cols == 257);

  // every filter has a single maximum and nonnegative weights
  for (std::size_t m = 0; m < fb.rows; ++m) {
    std::size_t peaks = 0;
    for (std::size_t k = 1; k + 1 < fb.cols; ++k) {
      CHECK(fb.at(m, k) >= 0.0);
      if (fb.at(m, k) > fb.at(m, k - 1) && fb.at(m, k) >= fb.at(m, k + 1))
        ++peaks;
    }
    CHECK(peaks == 1);
  }

  // each FFT bin's total weight stays bounded (adjacent triangles overlap
  // by at most one rising plus one falling flank)
  for (std::size_t k = 0; k < fb.cols; ++k) {
    double total = 0.0;
    for (std::size_t m = 0; m < fb.rows; ++m) total += fb.at(m, k);
    CHECK(total <= 1.0 + 1e-9);
  }

  MelConfig dense = cfg;
  dense.n_mels = 500;
  CHECK_THROWS_AS(mel_filterbank_matrix(dense, 16000), DegenerateFilterError);

  MelConfig eighty = cfg;
  eighty.n_mels = 80;
  CHECK(mel_filterbank_matrix(eighty, 16000).rows == 80);
}

TEST_CASE("silence maps to the log floor") {
  AudioBuffer buf;
  buf.samples.assign(16000, 0.0);
  const FeatureMatrix feats = mel_spectrogram(buf, FrameSpec{}, MelConfig{});
  CHECK(feats.rows == 98);
  CHECK(feats.cols == 40);
  for (double v : feats.data)
    CHECK(v == doctest::Approx(std::log(1e-10)).epsilon(1e-12));
}

TEST_CASE("1 kHz sine peaks at the nearest mel channel") {
  const AudioBuffer buf = vt::make_sine(1000.0, 1.0);
  MelConfig cfg;
  const FeatureMatrix feats = mel_spectrogram(buf, FrameSpec{}, cfg);

  const std::vector<double> centers = mel_filter_centers(cfg);
  std::size_t expected = 0;
  for (std::size_t m = 1; m < centers.size(); ++m)
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[expected] - 1000.0))
      expected = m;

  for (std::size_t t = 0; t < feats.rows; ++t) {
    std::size_t argmax = 0;
    for (std::size_t m = 1; m < feats.cols; ++m)
      if (feats.at(t, m) > feats.at(t, argmax)) argmax = m;
    CHECK(argmax == expected);
  }
}

TEST_CASE("doubling amplitude adds log(4) to energetic entries") {
  const AudioBuffer one = vt::make_sine(440.0, 0.5, 16000, 0.25);
  AudioBuffer two = one;
  for (double& s : two.samples) s *= 2.0;
  const FeatureMatrix f1 = mel_spectrogram(one, FrameSpec{}, MelConfig{});
  const FeatureMatrix f2 = mel_spectrogram(two, FrameSpec{}, MelConfig{});
  REQUIRE(f1.rows == f2.rows);
  for (std::size_t i = 0; i < f1.data.size(); ++i) {
    // far enough above the floor that the log epsilon is negligible
    if (f1.data[i] > std::log(1e-10) + 16.0) {
      CHECK(f2.data[i] - f1.data[i] ==
            doctest::Approx(std::log(4.0)).epsilon(1e-6));
    }
  }
}

TEST_CASE("row count equals frame count on random inputs") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 400 + rng() % 20000;
    AudioBuffer buf;
    buf.samples.resize(n);
    for (double& s : buf.samples) {
      const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
      s = u - 0.5;
    }
    const FrameSpec spec;
    const FeatureMatrix feats = mel_spectrogram(buf, spec, MelConfig{});
    CHECK(feats.rows == spec.frame_count(n, buf.sample_rate));
  }
}

TEST_CASE("shifting input by one hop shifts output rows") {
  const AudioBuffer base = vt::make_white_noise(1.0, 23);
  AudioBuffer shifted;
  shifted.sample_rate = base.sample_rate;
  shifted.samples.assign(base.samples.begin() + 160, base.samples.end());

  const FeatureMatrix f0 = mel_spectrogram(base, FrameSpec{}, MelConfig{});
  const FeatureMatrix f1 = mel_spectrogram(shifted, FrameSpec{}, MelConfig{});
  REQUIRE(f1.rows + 1 == f0.rows);
  for (std::size_t t = 0; t < f1.rows; ++t)
    for (std::size_t m = 0; m < f1.cols; ++m)
      CHECK(f1.at(t, m) ==
            doctest::Approx(f0.at(t + 1, m)).epsilon(1e-6));
}

TEST_CASE("energy monotonicity under amplitude scaling") {
  const AudioBuffer base = vt::make_white_noise(0.5, 29);
  AudioBuffer louder = base;
  for (double& s : louder.samples) s *= 1.7;
  const FeatureMatrix f0 = mel_spectrogram(base, FrameSpec{}, MelConfig{});
  const FeatureMatrix f1 = mel_spectrogram(louder, FrameSpec{}, MelConfig{});
  for (std::size_t i = 0; i < f0.data.size(); ++i)
    CHECK(f1.data[i] >= f0.data[i] - 1e-12);
}
