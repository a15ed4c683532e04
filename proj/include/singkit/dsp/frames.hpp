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

#include <string>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/core/mat.hpp"

namespace singkit::dsp {

constexpr int kDefaultSampleRate = 44100;
constexpr int kDefaultHop = 220;
constexpr float kLoudnessFloorDb = -80.0f;

struct Waveform {
  std::vector<float> samples; // [-1, 1]
  int sample_rate = kDefaultSampleRate;

  void validate() const {
    if (samples.empty()) throw ValueError("Waveform: empty");
    if (sample_rate <= 0) throw ConfigError("Waveform: sample_rate must be positive");
    for (float s : samples)
      if (!std::isfinite(s)) throw ValueError("Waveform: non-finite sample");
  }
};

enum class SeriesKind { f0_hz, vuv, loudness_db, logf0, residual_logf0 };

inline const char* series_kind_name(SeriesKind k) {
  switch (k) {
    case SeriesKind::f0_hz: return "f0_hz";
    case SeriesKind::vuv: return "vuv";
    case SeriesKind::loudness_db: return "loudness_db";
    case SeriesKind::logf0: return "logf0";
    case SeriesKind::residual_logf0: return "residual_logf0";
  }
  return "?";
}

// Per-frame scalar track on the shared frame clock.
struct FrameSeries {
  std::vector<float> values;
  int hop = kDefaultHop;
  int sample_rate = kDefaultSampleRate;
  SeriesKind kind = SeriesKind::f0_hz;

  int frames() const { return int(values.size()); }
};

// T×D per-frame feature matrix on the shared frame clock.
struct FeatureMatrix {
  Mat<float> data;
  int hop = kDefaultHop;
  int sample_rate = kDefaultSampleRate;

  int frames() const { return data.rows; }
  int dims() const { return data.cols; }
};

// Shared frame clock: T = ceil(num_samples / hop). Every extractor in this
// library returns exactly this many frames via centered, reflect-padded
// windows.
inline int frame_count(std::int64_t num_samples, int hop) {
  if (hop < 1) throw ConfigError("frame_count: hop must be >= 1, got " + std::to_string(hop));
  if (num_samples < 1)
    throw ValueError("frame_count: num_samples must be >= 1, got " + std::to_string(num_samples));
  return int((num_samples + hop - 1) / hop);
}

// Mirror index into [0, n) without repeating the edge sample.
inline std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  std::int64_t j = i % period;
  if (j < 0) j += period;
  return j < n ? j : period - j;
}

inline float sample_reflected(const std::vector<float>& x, std::int64_t i) {
  return x[std::size_t(reflect_index(i, std::int64_t(x.size())))];
}

inline void check_same_frames(int a, int b, const std::string& what) {
  if (a != b)
    throw ShapeError(what + ": frame counts differ (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
}

} // namespace singkit::dsp
