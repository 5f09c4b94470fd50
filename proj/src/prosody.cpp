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

#include "vqasr/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace vqasr {

namespace {

// Vertex of the parabola through (-1, ym), (0, y0), (1, yp).
// Returns offset in [-0.5, 0.5] and the interpolated peak value.
void parabolic_peak(double ym, double y0, double yp, double* offset,
                    double* value) {
  const double denom = ym - 2.0 * y0 + yp;
  if (std::abs(denom) < 1e-300) {
    *offset = 0.0;
    *value = y0;
    return;
  }
  double d = 0.5 * (ym - yp) / denom;
  d = std::clamp(d, -0.5, 0.5);
  *offset = d;
  *value = y0 - 0.25 * (ym - yp) * d;
}

// Normalized cross-correlation of a zero-mean window at one lag.
double nccf(const std::vector<double>& centered, int lag) {
  const int n = static_cast<int>(centered.size()) - lag;
  if (n <= 1) return 0.0;
  double num = 0.0, e1 = 0.0, e2 = 0.0;
  for (int i = 0; i < n; ++i) {
    num += centered[i] * centered[i + lag];
    e1 += centered[i] * centered[i];
    e2 += centered[i + lag] * centered[i + lag];
  }
  const double denom = std::sqrt(e1 * e2);
  if (denom <= 0.0) return 0.0;
  return num / denom;
}

}  // namespace

PitchTrack estimate_f0(const std::vector<std::span<const double>>& frames,
                       const PitchConfig& cfg, int sample_rate) {
  PitchTrack track;
  track.f0.assign(frames.size(), 0.0);
  track.voiced.assign(frames.size(), false);

  const int lag_min =
      std::max(2, static_cast<int>(std::floor(sample_rate / cfg.ceiling_hz)));
  const int lag_max =
      static_cast<int>(std::ceil(sample_rate / cfg.floor_hz));

  std::vector<double> centered;
  std::vector<double> r;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto frame = frames[t];
    const int win = static_cast<int>(frame.size());
    const int hi = std::min(lag_max, win - 2);
    if (hi <= lag_min) continue;

    double mean = 0.0;
    for (double v : frame) mean += v;
    mean /= win;
    centered.resize(frame.size());
    for (int i = 0; i < win; ++i) centered[i] = frame[i] - mean;

    // Correlation over [lag_min-1, hi+1] so refinement has neighbors.
    const int lo = lag_min - 1;
    r.assign(static_cast<std::size_t>(hi - lo + 2), 0.0);
    for (int lag = lo; lag <= hi + 1 && lag < win - 1; ++lag)
      r[static_cast<std::size_t>(lag - lo)] = nccf(centered, lag);

    // Local maxima in [lag_min, hi].
    double best = -2.0;
    std::vector<int> peaks;
    for (int lag = lag_min; lag <= hi; ++lag) {
      const double rm = r[static_cast<std::size_t>(lag - 1 - lo)];
      const double r0 = r[static_cast<std::size_t>(lag - lo)];
      const double rp = r[static_cast<std::size_t>(lag + 1 - lo)];
      if (r0 >= rm && r0 >= rp) {
        peaks.push_back(lag);
        best = std::max(best, r0);
      }
    }
    if (peaks.empty() || best < cfg.voicing_threshold) continue;

    // Shortest peak within the octave margin of the best wins; exact
    // multiples of the true period correlate just as well and would
    // otherwise pull the estimate down an octave.
    const double bar = std::max(cfg.voicing_threshold, best - cfg.octave_margin);
    int lag_pick = peaks.front();
    for (int lag : peaks) {
      if (r[static_cast<std::size_t>(lag - lo)] >= bar) {
        lag_pick = lag;
        break;
      }
    }

    double offset = 0.0, peak_val = 0.0;
    parabolic_peak(r[static_cast<std::size_t>(lag_pick - 1 - lo)],
                   r[static_cast<std::size_t>(lag_pick - lo)],
                   r[static_cast<std::size_t>(lag_pick + 1 - lo)], &offset,
                   &peak_val);
    const double lag_refined = lag_pick + offset;
    double f0 = sample_rate / lag_refined;
    f0 = std::clamp(f0, cfg.floor_hz * 0.9, cfg.ceiling_hz * 1.1);
    track.f0[t] = f0;
    track.voiced[t] = true;
  }
  return track;
}

CycleMarks mark_cycles(std::span<const double> window, double f0,
                       int sample_rate) {
  if (f0 <= 0.0) throw TooFewCyclesError("mark_cycles needs a voiced f0");
  const double period = sample_rate / f0;
  const int win = static_cast<int>(window.size());

  CycleMarks marks;
  // First mark: maximum over the first nominal period.
  int search_end = std::min(win, static_cast<int>(std::ceil(period)));
  int prev_idx = 0;
  for (int i = 1; i < search_end; ++i)
    if (window[i] > window[prev_idx]) prev_idx = i;

  auto push_mark = [&](int idx) {
    double offset = 0.0, value = window[idx];
    if (idx > 0 && idx + 1 < win)
      parabolic_peak(window[idx - 1], window[idx], window[idx + 1], &offset,
                     &value);
    marks.period_starts.push_back(idx + offset);
    marks.peak_amplitudes.push_back(std::abs(value));
  };
  push_mark(prev_idx);

  while (true) {
    const double center = marks.period_starts.back() + period;
    int lo = static_cast<int>(std::floor(center - 0.25 * period));
    int hi = static_cast<int>(std::ceil(center + 0.25 * period));
    lo = std::max(lo, prev_idx + 1);
    if (lo >= win) break;
    hi = std::min(hi, win - 1);
    int best = lo;
    for (int i = lo + 1; i <= hi; ++i)
      if (window[i] > window[best]) best = i;
    // A candidate that is not a true waveform maximum (the rising flank
    // of a peak cut off by the window, or a flat stretch between peaks)
    // would corrupt the period/amplitude tracks; stop marking instead.
    if (best == 0 || best + 1 >= win) break;
    const bool is_peak = window[best] >= window[best - 1] &&
                         window[best] >= window[best + 1] &&
                         (window[best] > window[best - 1] ||
                          window[best] > window[best + 1]);
    if (!is_peak) break;
    push_mark(best);
    prev_idx = best;
  }

  if (marks.period_starts.size() < 3)
    throw TooFewCyclesError("only " +
                            std::to_string(marks.period_starts.size()) +
                            " cycle marks fit in the window");
  return marks;
}

double local_jitter(const CycleMarks& marks) {
  const auto& s = marks.period_starts;
  if (s.size() < 3)
    throw TooFewCyclesError("local jitter needs at least 3 marks");
  std::vector<double> periods(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) periods[i] = s[i + 1] - s[i];

  double diff_sum = 0.0;
  for (std::size_t i = 0; i + 1 < periods.size(); ++i)
    diff_sum += std::abs(periods[i + 1] - periods[i]);
  const double mean_diff = diff_sum / static_cast<double>(periods.size() - 1);

  double period_sum = 0.0;
  for (double p : periods) period_sum += p;
  const double mean_period = period_sum / static_cast<double>(periods.size());
  return mean_diff / mean_period;
}

double local_shimmer(const CycleMarks& marks) {
  const auto& a = marks.peak_amplitudes;
  if (a.size() < 2)
    throw TooFewCyclesError("local shimmer needs at least 2 amplitudes");
  double diff_sum = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    diff_sum += std::abs(a[i + 1] - a[i]);
  const double mean_diff = diff_sum / static_cast<double>(a.size() - 1);

  double amp_sum = 0.0;
  for (double v : a) amp_sum += v;
  const double mean_amp = amp_sum / static_cast<double>(a.size());
  if (mean_amp <= 0.0)
    throw ZeroAmplitudeError("cycle peak amplitudes are all zero");
  return mean_diff / mean_amp;
}

std::vector<double> interpolate_unvoiced(const std::vector<double>& track,
                                         const std::vector<bool>& mask,
                                         double fallback) {
  if (track.size() != mask.size())
    throw ShapeMismatchError("interpolate_unvoiced: track/mask size mismatch");
  const std::size_t n = track.size();
  std::vector<double> out(track);

  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) valid.push_back(i);

  if (valid.empty()) {
    std::fill(out.begin(), out.end(), fallback);
    return out;
  }

  // Leading and trailing runs take the nearest valid value.
  for (std::size_t i = 0; i < valid.front(); ++i) out[i] = track[valid.front()];
  for (std::size_t i = valid.back() + 1; i < n; ++i) out[i] = track[valid.back()];

  // Interior gaps are filled linearly between the flanking valid frames.
  for (std::size_t v = 0; v + 1 < valid.size(); ++v) {
    const std::size_t a = valid[v], b = valid[v + 1];
    if (b == a + 1) continue;
    const double va = track[a], vb = track[b];
    for (std::size_t i = a + 1; i < b; ++i) {
      const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
      out[i] = va + w * (vb - va);
    }
  }
  return out;
}

std::vector<double> smooth_track(const std::vector<double>& track, int window) {
  if (window < 1 || window % 2 == 0)
    throw ConfigError("smoothing window must be odd and positive");
  const int n = static_cast<int>(track.size());
  const int half = window / 2;
  std::vector<double> out(track.size());

  // Prefix sums keep this O(n) even for the 151-frame window.
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + track[i];
  for (int t = 0; t < n; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(n - 1, t + half);
    out[t] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> delta(const std::vector<double>& track) {
  const std::size_t n = track.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  out[0] = track[1] - track[0];
  out[n - 1] = track[n - 1] - track[n - 2];
  for (std::size_t t = 1; t + 1 < n; ++t)
    out[t] = (track[t + 1] - track[t - 1]) / 2.0;
  return out;
}

FeatureMatrix cmvn(const FeatureMatrix& features) {
  if (features.rows < 2)
    throw TooShortError("cmvn needs at least 2 frames, got " +
                        std::to_string(features.rows));
  constexpr double kStdFloor = 1e-8;
  FeatureMatrix out = features;
  for (std::size_t c = 0; c < features.cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < features.rows; ++r) mean += features.at(r, c);
    mean /= static_cast<double>(features.rows);
    double var = 0.0;
    for (std::size_t r = 0; r < features.rows; ++r) {
      const double d = features.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(features.rows);
    const double scale = 1.0 / std::max(std::sqrt(var), kStdFloor);
    for (std::size_t r = 0; r < features.rows; ++r)
      out.at(r, c) = (features.at(r, c) - mean) * scale;
  }
  return out;
}

FeatureMatrix random_features(std::size_t n_frames, std::size_t n_feats,
                              std::uint64_t seed) {
  FeatureMatrix out(n_frames, n_feats);
  out.labels.resize(n_feats);
  for (std::size_t c = 0; c < n_feats; ++c)
    out.labels[c] = "rand" + std::to_string(c);
  std::mt19937_64 rng(seed);
  for (double& v : out.data) {
    // 53-bit uniform in [0, 1), scaled to [0, 10); independent of the
    // standard library's distribution implementation.
    v = static_cast<double>(rng() >> 11) * (10.0 / 9007199254740992.0);
  }
  return out;
}

RawProsody analyze_frames(const std::vector<std::span<const double>>& frames,
                          const PitchConfig& cfg, int sample_rate) {
  RawProsody raw;
  raw.pitch = estimate_f0(frames, cfg, sample_rate);
  const std::size_t n = frames.size();
  raw.jitter.assign(n, 0.0);
  raw.has_jitter.assign(n, false);
  raw.shimmer.assign(n, 0.0);
  raw.has_shimmer.assign(n, false);

  for (std::size_t t = 0; t < n; ++t) {
    if (!raw.pitch.voiced[t]) continue;
    try {
      const CycleMarks marks = mark_cycles(frames[t], raw.pitch.f0[t], sample_rate);
      raw.jitter[t] = local_jitter(marks);
      raw.has_jitter[t] = true;
      raw.shimmer[t] = local_shimmer(marks);
      raw.has_shimmer[t] = true;
    } catch (const TooFewCyclesError&) {
      // frame keeps empty jitter/shimmer and is filled by interpolation
    } catch (const ZeroAmplitudeError&) {
    }
  }
  return raw;
}

ProsodyTrack process_prosody(const RawProsody& raw, const PitchConfig& cfg) {
  const std::size_t n = raw.pitch.f0.size();
  ProsodyTrack track;
  track.voiced_mask = raw.pitch.voiced;

  std::vector<double> f0 =
      interpolate_unvoiced(raw.pitch.f0, raw.pitch.voiced, cfg.fallback_f0);
  for (double& v : f0) v = std::log(v);
  track.f0 = smooth_track(f0, cfg.smoothing_window);
  track.delta_f0 = delta(track.f0);

  std::vector<double> jit =
      interpolate_unvoiced(raw.jitter, raw.has_jitter, 0.0);
  track.jitter = smooth_track(jit, cfg.smoothing_window);

  std::vector<double> shim =
      interpolate_unvoiced(raw.shimmer, raw.has_shimmer, 0.0);
  track.shimmer = smooth_track(shim, cfg.smoothing_window);

  track.pov.assign(n, -1.0);
  for (std::size_t t = 0; t < n; ++t)
    if (raw.pitch.voiced[t]) track.pov[t] = 1.0;
  return track;
}

FeatureMatrix extract_prosody(const AudioBuffer& buf, const FrameSpec& frame,
                              const PitchConfig& cfg,
                              const ProsodySelection& selection) {
  if (selection.empty())
    throw ConfigError("extract_prosody: empty feature selection");
  const auto frames = frame_signal(buf, frame);
  const RawProsody raw = analyze_frames(frames, cfg, buf.sample_rate);
  const ProsodyTrack track = process_prosody(raw, cfg);

  // Canonical column order regardless of the selection's order.
  static constexpr ProsodyFeature kOrder[] = {
      ProsodyFeature::f0, ProsodyFeature::pov, ProsodyFeature::delta_f0,
      ProsodyFeature::jitter, ProsodyFeature::shimmer};
  std::vector<ProsodyFeature> picked;
  for (ProsodyFeature f : kOrder)
    if (std::find(selection.begin(), selection.end(), f) != selection.end())
      picked.push_back(f);

  FeatureMatrix out(frames.size(), picked.size());
  out.labels.resize(picked.size());
  for (std::size_t c = 0; c < picked.size(); ++c) {
    const std::vector<double>* src = nullptr;
    switch (picked[c]) {
      case ProsodyFeature::f0:
        src = &track.f0;
        out.labels[c] = "f0";
        break;
      case ProsodyFeature::pov:
        src = &track.pov;
        out.labels[c] = "pov";
        break;
      case ProsodyFeature::delta_f0:
        src = &track.delta_f0;
        out.labels[c] = "delta_f0";
        break;
      case ProsodyFeature::jitter:
        src = &track.jitter;
        out.labels[c] = "jitter";
        break;
      case ProsodyFeature::shimmer:
        src = &track.shimmer;
        out.labels[c] = "shimmer";
        break;
    }
    for (std::size_t r = 0; r < frames.size(); ++r) out.at(r, c) = (*src)[r];
  }
  return out;
}

}  // namespace vqasr
