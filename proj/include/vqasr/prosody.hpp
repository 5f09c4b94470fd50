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
#include <optional>
#include <span>
#include <vector>

#include "vqasr/audio_io.hpp"
#include "vqasr/feature_matrix.hpp"

namespace vqasr {

struct PitchConfig {
  double floor_hz = 75.0;
  double ceiling_hz = 600.0;
  double voicing_threshold = 0.45;
  int smoothing_window = 151;   // frames, odd
  double fallback_f0 = 100.0;   // used when an utterance is fully unvoiced
  // Octave guard: the shortest correlation peak within this margin of
  // the best one wins, so the period's exact multiples do not pull the
  // track an octave down.
  double octave_margin = 0.15;
};

// Glottal cycle marks within one analysis window. Peak positions are
// sub-sample (parabolic vertex of the waveform maximum).
struct CycleMarks {
  std::vector<double> period_starts;    // strictly increasing sample positions
  std::vector<double> peak_amplitudes;  // |amplitude| at each mark
};

enum class ProsodyFeature : std::uint8_t { f0, pov, delta_f0, jitter, shimmer };

// Canonical assembly order: f0, pov, delta_f0, jitter, shimmer.
using ProsodySelection = std::vector<ProsodyFeature>;

// Per-frame pitch and voicing from normalized autocorrelation.
struct PitchTrack {
  std::vector<double> f0;     // Hz; 0 where unvoiced
  std::vector<bool> voiced;
};

// Raw per-frame measurements before interpolation and smoothing.
struct RawProsody {
  PitchTrack pitch;
  std::vector<double> jitter;       // valid where has_jitter
  std::vector<bool> has_jitter;
  std::vector<double> shimmer;      // valid where has_shimmer
  std::vector<bool> has_shimmer;
};

// Fully processed per-frame tracks, aligned with the spectral frame grid.
struct ProsodyTrack {
  std::vector<double> f0;        // interpolated, log, smoothed
  std::vector<double> pov;       // +1 voiced / -1 unvoiced
  std::vector<double> delta_f0;  // central difference of processed f0
  std::vector<double> jitter;    // interpolated, smoothed
  std::vector<double> shimmer;   // interpolated, smoothed
  std::vector<bool> voiced_mask; // pre-interpolation voicing
};

// Normalized autocorrelation pitch with parabolic peak refinement over
// lags [fs/ceiling, fs/floor]. Frames whose best peak falls below
// voicing_threshold are unvoiced. Silence yields all-unvoiced.
PitchTrack estimate_f0(const std::vector<std::span<const double>>& frames,
                       const PitchConfig& cfg, int sample_rate);

// Locates successive waveform maxima, each searched within +/-25% of the
// nominal period fs/f0 from the previous mark. Throws TooFewCyclesError
// when fewer than 3 marks fit in the window.
CycleMarks mark_cycles(std::span<const double> window, double f0,
                       int sample_rate);

// mean_i |P_{i+1} - P_i| / mean_i P_i over consecutive periods.
double local_jitter(const CycleMarks& marks);

// mean_i |A_{i+1} - A_i| / mean_i A_i over peak amplitudes.
double local_shimmer(const CycleMarks& marks);

// Fills gaps where mask is false: linear interpolation between flanking
// valid values, nearest-value extension at the edges, `fallback` when no
// frame is valid.
std::vector<double> interpolate_unvoiced(const std::vector<double>& track,
                                         const std::vector<bool>& mask,
                                         double fallback);

// Centered running mean across `window` frames, truncated at the edges.
std::vector<double> smooth_track(const std::vector<double>& track, int window);

// Central difference with replicated edges.
std::vector<double> delta(const std::vector<double>& track);

// Per-channel standardization over the utterance (population std, floor
// 1e-8). Throws TooShortError for fewer than 2 frames.
FeatureMatrix cmvn(const FeatureMatrix& features);

// i.i.d. Uniform(0, 10) features, deterministic for a given seed.
FeatureMatrix random_features(std::size_t n_frames, std::size_t n_feats,
                              std::uint64_t seed);

// Per-frame F0 / voicing / jitter / shimmer measurements.
RawProsody analyze_frames(const std::vector<std::span<const double>>& frames,
                          const PitchConfig& cfg, int sample_rate);

// Interpolate, log-transform pitch, smooth, POV, delta.
ProsodyTrack process_prosody(const RawProsody& raw, const PitchConfig& cfg);

// Full pipeline; assembles the selected columns in canonical order.
// CMVN is not applied here (it runs jointly with spectral features).
FeatureMatrix extract_prosody(const AudioBuffer& buf, const FrameSpec& frame,
                              const PitchConfig& cfg,
                              const ProsodySelection& selection);

}  // namespace vqasr
