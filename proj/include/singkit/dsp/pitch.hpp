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

#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/loudness.hpp"

// Reference F0 estimator: YIN-style difference function with
// cumulative-mean normalization, absolute threshold, parabolic
// interpolation, and a 5-frame median filter. Sits behind F0Result so
// file-loaded contours can substitute for it.

namespace singkit::dsp {

struct F0Result {
  FrameSeries f0;  // Hz, 0 on unvoiced frames
  FrameSeries vuv; // {0, 1}
};

struct PitchConfig {
  double fmin = 65.0;
  double fmax = 1000.0;
  double threshold = 0.15;
  double rms_gate_db = -60.0;
  int median_width = 5;

  void validate() const {
    if (!(fmin >= 40.0 && fmin < fmax && fmax <= 1600.0))
      throw ConfigError("PitchConfig: need 40 <= fmin < fmax <= 1600");
  }
};

namespace detail {

inline float median_of(std::vector<float>& v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

} // namespace detail

inline F0Result extract_f0(const Waveform& w, const PitchConfig& cfg = {}, int hop = kDefaultHop) {
  w.validate();
  cfg.validate();

  const int sr = w.sample_rate;
  const int tau_min = std::max(2, int(std::floor(double(sr) / cfg.fmax)));
  const int tau_max = int(std::ceil(double(sr) / cfg.fmin));
  const int integ = std::max(256, int(std::lround(0.040 * sr))); // 40 ms integration window
  const int span = integ + tau_max + 1;
  const int t_frames = frame_count(std::int64_t(w.samples.size()), hop);

  F0Result out;
  out.f0.hop = out.vuv.hop = hop;
  out.f0.sample_rate = out.vuv.sample_rate = sr;
  out.f0.kind = SeriesKind::f0_hz;
  out.vuv.kind = SeriesKind::vuv;
  out.f0.values.assign(std::size_t(t_frames), 0.0f);
  out.vuv.values.assign(std::size_t(t_frames), 0.0f);

  std::vector<float> buf(std::size_t(span), 0.0f);
  std::vector<double> diff(std::size_t(tau_max) + 1, 0.0);
  std::vector<double> cmndf(std::size_t(tau_max) + 1, 1.0);

  for (int t = 0; t < t_frames; ++t) {
    const std::int64_t start = std::int64_t(t) * hop - span / 2;
    for (int j = 0; j < span; ++j) buf[std::size_t(j)] = sample_reflected(w.samples, start + j);

    for (int tau = 1; tau <= tau_max; ++tau) {
      const float* a = buf.data();
      const float* b = buf.data() + tau;
      double acc = 0.0;
      for (int j = 0; j < integ; ++j) {
        const double d = double(a[j]) - double(b[j]);
        acc += d * d;
      }
      diff[std::size_t(tau)] = acc;
    }

    double cum = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      cum += diff[std::size_t(tau)];
      cmndf[std::size_t(tau)] = cum > 1e-12 ? diff[std::size_t(tau)] * tau / cum : 1.0;
    }

    // First dip under threshold, walked to its local minimum; else global min.
    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (cmndf[std::size_t(tau)] < cfg.threshold) {
        while (tau + 1 <= tau_max && cmndf[std::size_t(tau) + 1] < cmndf[std::size_t(tau)]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) {
      best = tau_min;
      for (int tau = tau_min + 1; tau <= tau_max; ++tau)
        if (cmndf[std::size_t(tau)] < cmndf[std::size_t(best)]) best = tau;
    }

    const bool periodic = cmndf[std::size_t(best)] < cfg.threshold;
    const bool loud = frame_rms_db(w, t, hop) > cfg.rms_gate_db;
    if (!(periodic && loud)) continue;

    double tau_hat = double(best);
    if (best > tau_min && best < tau_max) {
      const double y0 = cmndf[std::size_t(best) - 1];
      const double y1 = cmndf[std::size_t(best)];
      const double y2 = cmndf[std::size_t(best) + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      if (std::abs(denom) > 1e-12) tau_hat += 0.5 * (y0 - y2) / denom;
    }
    const double f0 = std::clamp(double(sr) / tau_hat, cfg.fmin, cfg.fmax);
    out.f0.values[std::size_t(t)] = float(f0);
    out.vuv.values[std::size_t(t)] = 1.0f;
  }

  // Median filter over voiced neighbors; VUV decisions untouched.
  const int half = cfg.median_width / 2;
  std::vector<float> filtered = out.f0.values;
  std::vector<float> window;
  for (int t = 0; t < t_frames; ++t) {
    if (out.vuv.values[std::size_t(t)] == 0.0f) continue;
    window.clear();
    for (int k = std::max(0, t - half); k <= std::min(t_frames - 1, t + half); ++k)
      if (out.vuv.values[std::size_t(k)] > 0.0f) window.push_back(out.f0.values[std::size_t(k)]);
    filtered[std::size_t(t)] = detail::median_of(window);
  }
  out.f0.values = std::move(filtered);
  return out;
}

} // namespace singkit::dsp
