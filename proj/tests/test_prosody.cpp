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
#include <functional>
#include <numbers>
#include <random>

#include "support/toy_corpus.hpp"
#include "vqasr/prosody.hpp"

using namespace vqasr;
namespace vt = vqasr::testing;

namespace {

// Raised-cosine pulse train: like an impulse train but a few samples of
// misalignment still correlate, which keeps the pitch tracker happy.
// Periods and amplitudes cycle through the given vectors; the realized
// per-cycle sequences are reported so tests can derive the exact
// injected perturbation.
struct BumpTrain {
  AudioBuffer audio;
  std::vector<int> periods;
  std::vector<double> amplitudes;
};

BumpTrain make_bump_train(const std::function<int(std::size_t)>& period_of,
                          const std::function<double(std::size_t)>& amp_of,
                          double seconds, int sample_rate = 16000) {
  BumpTrain train;
  train.audio.sample_rate = sample_rate;
  const std::size_t n = static_cast<std::size_t>(seconds * sample_rate);
  train.audio.samples.assign(n, 0.0);
  constexpr int kHalfWidth = 10;
  std::size_t pos = kHalfWidth;
  std::size_t cycle = 0;
  while (pos + kHalfWidth < n) {
    const double a = amp_of(cycle);
    for (int k = -kHalfWidth; k <= kHalfWidth; ++k) {
      const double w =
          0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * k /
                                (2.0 * (kHalfWidth + 1))));
      train.audio.samples[pos + static_cast<std::size_t>(kHalfWidth + k) -
                          kHalfWidth] += a * w;
    }
    train.amplitudes.push_back(a);
    const int period = period_of(cycle);
    train.periods.push_back(period);
    pos += static_cast<std::size_t>(period);
    ++cycle;
  }
  train.periods.pop_back();  // last period is not completed by a next bump
  return train;
}

// mean |P_{i+1} - P_i| / mean P_i of the realized sequence.
double sequence_local_jitter(const std::vector<int>& periods) {
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < periods.size(); ++i)
    diff += std::abs(periods[i + 1] - periods[i]);
  for (int p : periods) total += p;
  return (diff / static_cast<double>(periods.size() - 1)) /
         (total / static_cast<double>(periods.size()));
}

double mean_of(const std::vector<double>& values, const std::vector<bool>& use) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (use[i]) {
      sum += values[i];
      ++n;
    }
  }
  REQUIRE(n > 0);
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("pure sine pitch within 2% at 120/200/350 Hz") {
  for (double freq : {120.0, 200.0, 350.0}) {
    const AudioBuffer buf = vt::make_sine(freq, 1.0);
    const auto frames = frame_signal(buf, FrameSpec{});
    const PitchTrack track = estimate_f0(frames, PitchConfig{}, buf.sample_rate);
    std::size_t voiced = 0, accurate = 0;
    for (std::size_t t = 0; t < frames.size(); ++t) {
      if (!track.voiced[t]) continue;
      ++voiced;
      if (std::abs(track.f0[t] - freq) <= 0.02 * freq) ++accurate;
    }
    INFO("freq = ", freq);
    CHECK(voiced >= frames.size() * 95 / 100);
    CHECK(accurate * 100 >= voiced * 95);
  }
}

TEST_CASE("200 Hz sine is voiced on every frame") {
  const AudioBuffer buf = vt::make_sine(200.0, 1.0);
  const auto frames = frame_signal(buf, FrameSpec{});
  const PitchTrack track = estimate_f0(frames, PitchConfig{}, buf.sample_rate);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    CHECK(track.voiced[t]);
    CHECK(std::abs(track.f0[t] - 200.0) <= 4.0);
  }
}

TEST_CASE("white noise is mostly unvoiced; silence entirely") {
  const AudioBuffer noise = vt::make_white_noise(1.0, 5);
  const auto frames = frame_signal(noise, FrameSpec{});
  const PitchTrack track = estimate_f0(frames, PitchConfig{}, noise.sample_rate);
  std::size_t unvoiced = 0;
  for (bool v : track.voiced)
    if (!v) ++unvoiced;
  CHECK(unvoiced * 100 >= frames.size() * 90);

  AudioBuffer zero;
  zero.samples.assign(16000, 0.0);
  const auto zero_frames = frame_signal(zero, FrameSpec{});
  const PitchTrack zt = estimate_f0(zero_frames, PitchConfig{}, 16000);
  for (bool v : zt.voiced) CHECK_FALSE(v);
}

TEST_CASE("mark_cycles on a 100 Hz pulse train") {
  std::vector<double> window(400, 0.0);
  for (int p = 0; p < 400; p += 160) window[static_cast<std::size_t>(p)] = 0.5;
  const CycleMarks marks = mark_cycles(window, 100.0, 16000);
  REQUIRE(marks.period_starts.size() == 3);
  for (std::size_t i = 0; i + 1 < marks.period_starts.size(); ++i) {
    const double period =
        marks.period_starts[i + 1] - marks.period_starts[i];
    CHECK(std::abs(period - 160.0) <= 1.0);
  }
}

TEST_CASE("mark_cycles on a perfect sine gives equal amplitudes") {
  std::vector<double> window(400);
  for (std::size_t i = 0; i < window.size(); ++i)
    window[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 200.0 * i / 16000.0);
  const CycleMarks marks = mark_cycles(window, 200.0, 16000);
  REQUIRE(marks.peak_amplitudes.size() >= 3);
  for (double a : marks.peak_amplitudes)
    CHECK(std::abs(a - marks.peak_amplitudes[0]) <=
          1e-3 * marks.peak_amplitudes[0]);
}

TEST_CASE("mark_cycles needs at least three marks") {
  std::vector<double> window(400);
  for (std::size_t i = 0; i < window.size(); ++i)
    window[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 50.0 * i / 16000.0);
  // 50 Hz -> 320-sample period, only one full cycle in 400 samples
  CHECK_THROWS_AS(mark_cycles(window, 50.0, 16000), TooFewCyclesError);
}

TEST_CASE("local jitter hand values") {
  CycleMarks equal;
  equal.period_starts = {0, 160, 320, 480};
  equal.peak_amplitudes = {1, 1, 1, 1};
  CHECK(local_jitter(equal) == 0.0);

  // periods [160, 176, 160] -> (16+16)/2 / 165.333 = 0.09677
  CycleMarks wobble;
  wobble.period_starts = {0, 160, 336, 496};
  wobble.peak_amplitudes = {1, 1, 1, 1};
  CHECK(local_jitter(wobble) == doctest::Approx(0.09677).epsilon(1e-4));

  // time-scale invariance
  CycleMarks scaled = wobble;
  for (double& s : scaled.period_starts) s *= 3.25;
  CHECK(local_jitter(scaled) ==
        doctest::Approx(local_jitter(wobble)).epsilon(1e-12));

  CycleMarks two;
  two.period_starts = {0, 160};
  two.peak_amplitudes = {1, 1};
  CHECK_THROWS_AS(local_jitter(two), TooFewCyclesError);
}

TEST_CASE("local shimmer hand values") {
  CycleMarks equal;
  equal.period_starts = {0, 100, 200};
  equal.peak_amplitudes = {0.7, 0.7, 0.7};
  CHECK(local_shimmer(equal) == 0.0);

  // amplitudes [1.0, 0.8, 1.0] -> (0.2+0.2)/2 / 0.93333 = 0.21428
  CycleMarks wobble;
  wobble.period_starts = {0, 100, 200};
  wobble.peak_amplitudes = {1.0, 0.8, 1.0};
  CHECK(local_shimmer(wobble) == doctest::Approx(0.2143).epsilon(1e-3));

  CycleMarks scaled = wobble;
  for (double& a : scaled.peak_amplitudes) a *= 0.123;
  CHECK(local_shimmer(scaled) ==
        doctest::Approx(local_shimmer(wobble)).epsilon(1e-12));

  CycleMarks zero;
  zero.period_starts = {0, 100, 200};
  zero.peak_amplitudes = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(local_shimmer(zero), ZeroAmplitudeError);
}

TEST_CASE("sines carry almost no jitter or shimmer") {
  for (double freq : {120.0, 200.0, 350.0}) {
    const AudioBuffer buf = vt::make_sine(freq, 1.0);
    const auto frames = frame_signal(buf, FrameSpec{});
    const RawProsody raw = analyze_frames(frames, PitchConfig{}, 16000);
    INFO("freq = ", freq);
    std::size_t measured = 0;
    for (std::size_t t = 0; t < frames.size(); ++t) {
      if (raw.has_jitter[t]) {
        ++measured;
        CHECK(raw.jitter[t] < 0.01);
      }
      if (raw.has_shimmer[t]) CHECK(raw.shimmer[t] < 0.01);
    }
    CHECK(measured > 0);
  }
}

TEST_CASE("injected jitter is recovered within 20% before smoothing") {
  // i.i.d. period perturbation (a deterministic alternation would make
  // the signal exactly periodic at two cycles and legitimately pull the
  // pitch tracker an octave down); d = 1 and 7 land near the 0.01 and
  // 0.05 nominal jitter levels
  for (int d : {1, 7}) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(d));
    std::vector<int> jitter_seq(512);
    for (int& p : jitter_seq)
      p = 100 - d + static_cast<int>(rng() % (2 * d + 1));
    const BumpTrain train = make_bump_train(
        [&](std::size_t c) { return jitter_seq[c % jitter_seq.size()]; },
        [](std::size_t) { return 0.5; }, 1.0);

    const double expected = sequence_local_jitter(train.periods);
    const auto frames = frame_signal(train.audio, FrameSpec{});
    const RawProsody raw = analyze_frames(frames, PitchConfig{}, 16000);
    const double measured = mean_of(raw.jitter, raw.has_jitter);
    INFO("d = ", d, " injected ", expected, " measured ", measured);
    CHECK(expected > 0.0);
    CHECK(std::abs(measured - expected) <= 0.20 * expected);
  }
}

TEST_CASE("injected shimmer is recovered within 20% before smoothing") {
  // alternating amplitudes A(1 +/- g) give local shimmer 2g/(1 + g/3)
  // on three-peak windows; the 20% band absorbs the window effects
  for (double target : {0.01, 0.05}) {
    const double g = target / 2.0;
    const BumpTrain train = make_bump_train(
        [](std::size_t) { return 100; },
        [&](std::size_t c) { return 0.5 * (c % 2 == 0 ? 1.0 + g : 1.0 - g); },
        1.0);
    const auto frames = frame_signal(train.audio, FrameSpec{});
    const RawProsody raw = analyze_frames(frames, PitchConfig{}, 16000);
    const double measured = mean_of(raw.shimmer, raw.has_shimmer);
    INFO("target = ", target, " measured ", measured);
    CHECK(std::abs(measured - target) <= 0.20 * target);
  }
}

TEST_CASE("interpolate_unvoiced fills gaps, edges and the empty case") {
  CHECK(interpolate_unvoiced({100, 0, 0, 130}, {true, false, false, true},
                             100.0) ==
        std::vector<double>{100, 110, 120, 130});
  CHECK(interpolate_unvoiced({0, 100, 100, 0}, {false, true, true, false},
                             50.0) == std::vector<double>{100, 100, 100, 100});
  CHECK(interpolate_unvoiced({0, 0, 0}, {false, false, false}, 100.0) ==
        std::vector<double>{100, 100, 100});
}

TEST_CASE("interpolate_unvoiced leaves no gaps for random masks") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    std::vector<double> values(n);
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = static_cast<double>(rng() % 1000) / 10.0;
      mask[i] = (rng() % 3) == 0;
    }
    const auto filled = interpolate_unvoiced(values, mask, 42.0);
    REQUIRE(filled.size() == n);
    double lo = 1e300, hi = -1e300;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) {
        any = true;
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
        CHECK(filled[i] == values[i]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::isfinite(filled[i]));
      if (any) {
        CHECK(filled[i] >= lo - 1e-12);  // linear fill stays inside the hull
        CHECK(filled[i] <= hi + 1e-12);
      } else {
        CHECK(filled[i] == 42.0);
      }
    }
  }
}

TEST_CASE("smooth_track semantics") {
  SUBCASE("constant stays constant") {
    const std::vector<double> c(200, 3.5);
    CHECK(smooth_track(c, 151) == c);
  }

  SUBCASE("unit impulse spreads as a truncated mean") {
    std::vector<double> impulse(151, 0.0);
    impulse[75] = 1.0;
    const auto smoothed = smooth_track(impulse, 151);
    for (int t = 0; t < 151; ++t) {
      const int lo = std::max(0, t - 75), hi = std::min(150, t + 75);
      // the impulse at 75 is inside every truncated window here
      CHECK(smoothed[static_cast<std::size_t>(t)] ==
            doctest::Approx(1.0 / (hi - lo + 1)).epsilon(1e-12));
    }
    CHECK(smoothed[75] == doctest::Approx(1.0 / 151).epsilon(1e-12));
  }

  SUBCASE("short track equals global mean where the window spans it") {
    std::vector<double> track(100);
    for (std::size_t i = 0; i < track.size(); ++i)
      track[i] = static_cast<double>(i * i % 37);
    double global = 0.0;
    for (double v : track) global += v;
    global /= static_cast<double>(track.size());
    const auto smoothed = smooth_track(track, 151);
    for (int t = 0; t < 100; ++t) {
      const bool spans_all = (t - 75 <= 0) && (t + 75 >= 99);
      if (spans_all)
        CHECK(smoothed[static_cast<std::size_t>(t)] ==
              doctest::Approx(global).epsilon(1e-12));
    }
    // outside the spanning range the mean is over a sub-window
    CHECK(smoothed[99] != doctest::Approx(global).epsilon(1e-9));
  }

  SUBCASE("commutes with adding a constant") {
    std::mt19937_64 rng(37);
    std::vector<double> track(300);
    for (double& v : track) v = static_cast<double>(rng() % 1000) / 25.0;
    std::vector<double> plus = track;
    for (double& v : plus) v += 17.25;
    const auto s0 = smooth_track(track, 151);
    const auto s1 = smooth_track(plus, 151);
    for (std::size_t i = 0; i < track.size(); ++i)
      CHECK(std::abs(s1[i] - s0[i] - 17.25) <= 1e-9);
  }
}

TEST_CASE("delta is a central difference with replicated edges") {
  CHECK(delta({5, 5, 5, 5}) == std::vector<double>{0, 0, 0, 0});
  const auto linear = delta({1, 3, 5, 7, 9});
  for (double v : linear) CHECK(v == doctest::Approx(2.0));
  CHECK(delta({0, 1, 0}) == std::vector<double>{1, 0, -1});
  CHECK(delta({7.0}) == std::vector<double>{0});
}

TEST_CASE("cmvn normalizes per channel") {
  SUBCASE("hand values and the constant-channel guard") {
    FeatureMatrix m(2, 2);
    m.at(0, 0) = 0.0;
    m.at(1, 0) = 2.0;
    m.at(0, 1) = 5.0;
    m.at(1, 1) = 5.0;
    const FeatureMatrix out = cmvn(m);
    CHECK(out.at(0, 0) == doctest::Approx(-1.0));
    CHECK(out.at(1, 0) == doctest::Approx(1.0));
    CHECK(out.at(0, 1) == 0.0);
    CHECK(out.at(1, 1) == 0.0);
  }

  SUBCASE("statistics and idempotence on random data") {
    std::mt19937_64 rng(41);
    FeatureMatrix m(50, 7);
    for (double& v : m.data)
      v = static_cast<double>(rng() % 10000) / 100.0 - 50.0;
    const FeatureMatrix out = cmvn(m);
    for (std::size_t c = 0; c < out.cols; ++c) {
      double mu = 0.0;
      for (std::size_t r = 0; r < out.rows; ++r) mu += out.at(r, c);
      mu /= static_cast<double>(out.rows);
      double var = 0.0;
      for (std::size_t r = 0; r < out.rows; ++r)
        var += (out.at(r, c) - mu) * (out.at(r, c) - mu);
      var /= static_cast<double>(out.rows);
      CHECK(std::abs(mu) < 1e-6);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
    }
    const FeatureMatrix twice = cmvn(out);
    for (std::size_t i = 0; i < out.data.size(); ++i)
      CHECK(std::abs(twice.data[i] - out.data[i]) < 1e-6);
  }

  SUBCASE("too short") {
    FeatureMatrix m(1, 3);
    CHECK_THROWS_AS(cmvn(m), TooShortError);
  }
}

TEST_CASE("random_features are uniform, seeded and in range") {
  const FeatureMatrix a = random_features(200, 3, 99);
  const FeatureMatrix b = random_features(200, 3, 99);
  const FeatureMatrix c = random_features(200, 3, 100);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
  for (double v : a.data) {
    CHECK(v >= 0.0);
    CHECK(v < 10.0);
  }
  const FeatureMatrix big = random_features(100000, 1, 7);
  double mu = 0.0;
  for (double v : big.data) mu += v;
  mu /= static_cast<double>(big.data.size());
  CHECK(std::abs(mu - 5.0) < 0.1);
}

TEST_CASE("extract_prosody selections, ordering and POV") {
  const AudioBuffer buf = vt::make_sine(200.0, 0.7);

  const FeatureMatrix pitch = extract_prosody(
      buf, FrameSpec{}, PitchConfig{},
      {ProsodyFeature::f0, ProsodyFeature::pov, ProsodyFeature::delta_f0});
  CHECK(pitch.cols == 3);
  CHECK(pitch.labels ==
        std::vector<std::string>{"f0", "pov", "delta_f0"});

  const FeatureMatrix js = extract_prosody(
      buf, FrameSpec{}, PitchConfig{},
      {ProsodyFeature::shimmer, ProsodyFeature::jitter});  // order-insensitive
  CHECK(js.cols == 2);
  CHECK(js.labels == std::vector<std::string>{"jitter", "shimmer"});

  const FeatureMatrix all = extract_prosody(
      buf, FrameSpec{}, PitchConfig{},
      {ProsodyFeature::f0, ProsodyFeature::pov, ProsodyFeature::delta_f0,
       ProsodyFeature::jitter, ProsodyFeature::shimmer});
  CHECK(all.cols == 5);

  // POV values are exactly +/-1 and match the voicing mask
  const auto frames = frame_signal(buf, FrameSpec{});
  const RawProsody raw = analyze_frames(frames, PitchConfig{}, 16000);
  for (std::size_t t = 0; t < all.rows; ++t) {
    const double pov = all.at(t, 1);
    CHECK((pov == 1.0 || pov == -1.0));
    CHECK(pov == (raw.pitch.voiced[t] ? 1.0 : -1.0));
  }

  CHECK_THROWS_AS(extract_prosody(buf, FrameSpec{}, PitchConfig{}, {}),
                  ConfigError);
}

TEST_CASE("fully unvoiced audio still yields finite prosody") {
  AudioBuffer silence;
  silence.samples.assign(8000, 0.0);
  const FeatureMatrix all = extract_prosody(
      silence, FrameSpec{}, PitchConfig{},
      {ProsodyFeature::f0, ProsodyFeature::pov, ProsodyFeature::delta_f0,
       ProsodyFeature::jitter, ProsodyFeature::shimmer});
  for (double v : all.data) CHECK(std::isfinite(v));
  // log of the 100 Hz fallback
  CHECK(all.at(0, 0) == doctest::Approx(std::log(100.0)));
  CHECK(all.at(0, 1) == -1.0);
}
