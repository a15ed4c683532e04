// Copyright 2026 The singkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "singkit/core/mat.hpp"
#include "singkit/core/rng.hpp"
#include "singkit/dsp/cepstrum.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/mel.hpp"

// Deterministic pseudo-HLF extractor: the stand-in for HuBERT-soft features.
// Peak-normalize, then 13 mel-cepstra per frame, stacked over ±2 frames
// (65 dims), pushed through a fixed seed-0 random orthogonal projection to
// hlf_dim, then per-utterance mean-variance normalized. Carries phonetic
// (spectral-envelope) content, suppresses gain; not a claim of HuBERT
// equivalence. The ±2 context window plays the role delta features usually
// would: deltas are linear maps of the stacked frames, and the projection
// mixes them freely.

namespace singkit::corpus {

inline constexpr int kHlfCepstra = 13;
inline constexpr int kHlfStack = 5; // frames t-2 .. t+2
inline constexpr int kHlfRawDims = kHlfCepstra * kHlfStack;

namespace detail {

// hlf_dim×65 seed-0 projection with orthonormal rows (hlf_dim <= 65) or
// orthonormal columns (hlf_dim > 65).
inline Mat<double> hlf_projection(int hlf_dim) {
  if (hlf_dim < 1) throw ConfigError("pseudo_hlf: hlf_dim must be >= 1");
  return mat_random_orthogonal(hlf_dim, kHlfRawDims, 0);
}

} // namespace detail

inline dsp::FeatureMatrix pseudo_hlf(const dsp::Waveform& w, int hlf_dim,
                                     const dsp::MelConfig& mel_cfg = {},
                                     int hop = dsp::kDefaultHop) {
  w.validate();
  // Peak normalization first: rescaling the input by any factor cancels
  // here exactly (bit-exactly for powers of two), so gain never reaches the
  // mel floor logic below. The trailing MVN handles the rest.
  dsp::Waveform norm = w;
  float peak = 0.0f;
  for (float s : norm.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0f)
    for (float& s : norm.samples) s /= peak;
  const dsp::FeatureMatrix log_mel = dsp::mel_spectrogram(norm, mel_cfg, hop);
  const Mat<double> ceps = dsp::mel_cepstra(log_mel.data, kHlfCepstra);
  const int t_frames = ceps.rows;

  // Context stacking with edge clamping.
  Mat<double> stacked(t_frames, kHlfRawDims);
  for (int t = 0; t < t_frames; ++t)
    for (int s = 0; s < kHlfStack; ++s) {
      const int src = std::clamp(t + s - kHlfStack / 2, 0, t_frames - 1);
      for (int k = 0; k < kHlfCepstra; ++k)
        stacked(t, s * kHlfCepstra + k) = ceps(src, k);
    }

  const Mat<double> proj = detail::hlf_projection(hlf_dim);
  Mat<double> y(t_frames, hlf_dim);
  for (int t = 0; t < t_frames; ++t)
    for (int d = 0; d < hlf_dim; ++d) {
      double acc = 0.0;
      for (int i = 0; i < kHlfRawDims; ++i) acc += proj(d, i) * stacked(t, i);
      y(t, d) = acc;
    }

  // Per-utterance, per-dimension mean-variance normalization.
  for (int d = 0; d < hlf_dim; ++d) {
    double mean = 0.0;
    for (int t = 0; t < t_frames; ++t) mean += y(t, d);
    mean /= t_frames;
    double var = 0.0;
    for (int t = 0; t < t_frames; ++t) {
      const double dv = y(t, d) - mean;
      var += dv * dv;
    }
    var /= t_frames;
    const double inv = var > 1e-16 ? 1.0 / std::sqrt(var) : 0.0;
    for (int t = 0; t < t_frames; ++t) y(t, d) = (y(t, d) - mean) * inv;
  }

  dsp::FeatureMatrix out;
  out.hop = hop;
  out.sample_rate = w.sample_rate;
  out.data = y.cast<float>();
  return out;
}

} // namespace singkit::corpus
