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

#include <cmath>

#include "singkit/dsp/frames.hpp"

namespace singkit::dsp {

constexpr int kLoudnessWindow = 1024;

// Windowed RMS in dB (20*log10), floored at -80. Plain energy, no
// perceptual weighting.
inline FrameSeries extract_loudness(const Waveform& w, int hop = kDefaultHop,
                                    int window = kLoudnessWindow) {
  w.validate();
  const int t_frames = frame_count(std::int64_t(w.samples.size()), hop);
  FrameSeries out;
  out.hop = hop;
  out.sample_rate = w.sample_rate;
  out.kind = SeriesKind::loudness_db;
  out.values.resize(std::size_t(t_frames));
  for (int t = 0; t < t_frames; ++t) {
    const std::int64_t start = std::int64_t(t) * hop - window / 2;
    double acc = 0.0;
    for (int i = 0; i < window; ++i) {
      const double s = double(sample_reflected(w.samples, start + i));
      acc += s * s;
    }
    const double rms = std::sqrt(acc / window);
    const double db = rms > 0.0 ? 20.0 * std::log10(rms) : double(kLoudnessFloorDb);
    out.values[std::size_t(t)] = float(std::max(db, double(kLoudnessFloorDb)));
  }
  return out;
}

inline double frame_rms_db(const Waveform& w, int frame, int hop, int window = kLoudnessWindow) {
  const std::int64_t start = std::int64_t(frame) * hop - window / 2;
  double acc = 0.0;
  for (int i = 0; i < window; ++i) {
    const double s = double(sample_reflected(w.samples, start + i));
    acc += s * s;
  }
  const double rms = std::sqrt(acc / window);
  return rms > 0.0 ? std::max(20.0 * std::log10(rms), double(kLoudnessFloorDb))
                   : double(kLoudnessFloorDb);
}

} // namespace singkit::dsp
